#include "homog/fastslow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "homog/moments.hpp"
#include "homog/parallel.hpp"
#include "homog/stats.hpp"

namespace homog {
namespace {

std::int64_t step_count(const FastSlowSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("fastslow: n must be >= 1");
  if (!(spec.t_end > 0.0)) throw std::invalid_argument("fastslow: t_end must be > 0");
  return static_cast<std::int64_t>(std::floor(static_cast<double>(spec.n) * spec.t_end));
}

struct Increment {
  double inv_n;
  double inv_sqrt_n;
  double operator()(const FastSlowSpec& s, double x, double vy) const {
    double dx = s.a(x) * inv_n;
    if (s.b.form != NoiseForm::None) dx += s.b.h(x) * vy * inv_sqrt_n;
    return x + dx;
  }
};

}  // namespace

std::string DriftFn::describe() const {
  std::ostringstream s;
  s << constant << " + " << linear << "*x";
  return s.str();
}

std::string NoiseFn::describe() const {
  switch (form) {
    case NoiseForm::None: return "0";
    case NoiseForm::Additive: return "v(y)";
    case NoiseForm::Product: {
      std::ostringstream s;
      s << "(" << h0 << " + " << h1 << "*x) v(y)";
      return s.str();
    }
  }
  return "";
}

std::optional<std::vector<double>> fastslow_trajectory(const FastSlowSpec& spec, const Point& y0,
                                                       std::span<const double> grid) {
  const std::int64_t steps = step_count(spec);
  std::vector<std::int64_t> marks;
  for (double t : grid) {
    if (t < 0.0 || t > spec.t_end) throw std::invalid_argument("fastslow: grid time outside [0, t_end]");
    marks.push_back(static_cast<std::int64_t>(std::floor(static_cast<double>(spec.n) * t)));
  }
  const Increment inc{1.0 / static_cast<double>(spec.n), 1.0 / std::sqrt(static_cast<double>(spec.n))};
  std::vector<double> path_at(static_cast<std::size_t>(steps) + 1);
  double x = spec.xi;
  Point y = y0;
  path_at[0] = x;
  for (std::int64_t k = 0; k < steps; ++k) {
    x = inc(spec, x, spec.v(y));
    if (!(std::abs(x) <= kOverflowGuard)) return std::nullopt;
    y = spec.fast_map.step(y);
    path_at[static_cast<std::size_t>(k + 1)] = x;
  }
  std::vector<double> out;
  for (std::int64_t m : marks) out.push_back(path_at[static_cast<std::size_t>(std::min(m, steps))]);
  return out;
}

std::optional<double> fastslow_endpoint(const FastSlowSpec& spec, OrbitStream& fast) {
  const std::int64_t steps = step_count(spec);
  const Increment inc{1.0 / static_cast<double>(spec.n), 1.0 / std::sqrt(static_cast<double>(spec.n))};
  double x = spec.xi;
  bool overflow = false;
  for (std::int64_t k = 0; k < steps; ++k) {
    x = inc(spec, x, spec.v(fast.current()));
    fast.advance();
    if (!(std::abs(x) <= kOverflowGuard)) overflow = true;
  }
  if (overflow) return std::nullopt;
  return x;
}

GreenKuboEstimate green_kubo_sigma(const MapSystem& map, const HolderObservable& v,
                                   std::int64_t max_lag, const GreenKuboMc& mc) {
  if (max_lag < 1) throw std::invalid_argument("green_kubo_sigma: max_lag must be >= 1");
  if (mc.orbits < 2) throw std::invalid_argument("green_kubo_sigma: need at least 2 orbits");
  if (static_cast<std::int64_t>(mc.orbit_len) <= 2 * max_lag) {
    throw std::invalid_argument("green_kubo_sigma: orbit_len must exceed twice max_lag");
  }
  GreenKuboEstimate est;
  est.max_lag = max_lag;
  if (v.is_zero()) return est;

  const auto lag = static_cast<std::size_t>(max_lag);
  const std::size_t chunks = std::min<std::size_t>(mc.orbits, 256);
  // Per orbit: time average of v_t (v_t + 2 sum_{l=1}^{L} v_{t-l}) and of v_t.
  auto parts = map_chunks<std::vector<std::pair<double, double>>>(chunks, [&](std::size_t c) {
    const IndexRange r = split_range(mc.orbits, chunks, c);
    std::vector<std::pair<double, double>> out;
    std::vector<double> ring(lag, 0.0);
    for (std::size_t o = r.begin; o < r.end; ++o) {
      Rng rng = make_rng(mc.seed, o);
      OrbitStream s(map, rng, mc.burn_in);
      double window = 0.0;
      double acc = 0.0, mean = 0.0;
      for (std::size_t t = 0; t < mc.orbit_len; ++t) {
        const double vt = v(s.current());
        s.advance();
        if (t >= lag) acc += vt * (vt + 2.0 * window);
        mean += vt;
        double& slot = ring[t % lag];
        window += vt - slot;
        slot = vt;
        // Periodic exact refresh keeps the running window sum from drifting.
        if ((t + 1) % 65536 == 0) {
          window = 0.0;
          for (double u : ring) window += u;
        }
      }
      out.emplace_back(acc / static_cast<double>(mc.orbit_len - lag),
                       mean / static_cast<double>(mc.orbit_len));
    }
    return out;
  });
  std::vector<double> gk, means;
  for (const auto& p : parts) {
    for (const auto& [g, m] : p) {
      gk.push_back(g);
      means.push_back(m);
    }
  }
  const double m = mean_of(means);
  const double correction = (1.0 + 2.0 * static_cast<double>(max_lag)) * m * m;
  est.sigma2 = mean_of(gk) - correction;
  est.std_error = standard_error(gk);
  const ConfidenceInterval ci =
      bootstrap_mean_ci(gk, [&](double x) { return x - correction; }, {.seed = mc.seed});
  est.ci_low = std::min(ci.low, est.sigma2);
  est.ci_high = std::max(ci.high, est.sigma2);

  // Direct check: n^{-1} E[S_v(n)^2] over consecutive windows of independent streams.
  if (mc.direct_windows >= 100) {
    const std::int64_t n = est.direct_n;
    MomentScanMc mmc;
    mmc.orbits = mc.direct_windows;
    mmc.windows_per_stream = 100;
    mmc.burn_in = mc.burn_in;
    mmc.seed = mc.seed + 0x6b;
    const std::int64_t ns[] = {n};
    const auto rows = moment_scan(map, v, v, ns, 2.0, 1.0, mmc);
    const MomentEstimate& b = rows.front().birkhoff;
    est.direct = b.value * b.value / static_cast<double>(n);
    est.direct_std_error = 2.0 * b.value * b.std_error / static_cast<double>(n);
    const double joint = std::hypot(est.std_error, est.direct_std_error);
    if (std::abs(est.direct - est.sigma2) > 3.0 * joint) {
      est.consistent = false;
      std::ostringstream msg;
      msg << "green_kubo_sigma: series " << est.sigma2 << " and direct " << est.direct
          << " differ by more than 3 joint standard errors";
      est.warning = msg.str();
    }
  }
  return est;
}

DriftCoefficient iterated_drift_coeff(const MapSystem& map, const HolderObservable& v,
                                      std::int64_t n, const DriftMc& mc) {
  if (n < 2) throw std::invalid_argument("iterated_drift_coeff: n must be >= 2");
  DriftCoefficient out;
  out.n = n;
  if (v.is_zero()) return out;
  MomentScanMc mmc;
  mmc.orbits = mc.orbits;
  mmc.windows_per_stream = std::max<std::size_t>(1, std::min<std::size_t>(100, kMaxStreamLength / static_cast<std::size_t>(n)));
  mmc.burn_in = mc.burn_in;
  mmc.seed = mc.seed;
  const std::int64_t ns[] = {n / 2, n};
  const auto rows = moment_scan(map, v, v, ns, 1.0, 1.0, mmc);
  out.half_n_value = rows[0].iterated_mean_per_n;
  out.half_n_std_error = rows[0].iterated_mean_se;
  out.value = rows[1].iterated_mean_per_n;
  out.std_error = rows[1].iterated_mean_se;
  out.ci_low = out.value - 1.96 * out.std_error;
  out.ci_high = out.value + 1.96 * out.std_error;
  if (std::abs(out.value - out.half_n_value) > 3.0 * std::hypot(out.std_error, out.half_n_std_error)) {
    out.converged = false;
    std::ostringstream msg;
    msg << "iterated_drift_coeff: levels n=" << n / 2 << " and n=" << n << " differ by more than 3 sigma";
    out.warning = msg.str();
  }
  return out;
}

double euler_maruyama(const SdeCoefficients& c, const DriftFn& a, const NoiseFn& h, double xi,
                      double dt, double t_end, Rng& rng) {
  if (!(t_end > 0.0)) throw std::invalid_argument("euler_maruyama: t_end must be > 0");
  if (!(dt > 0.0) || dt > 1e-3 * t_end) {
    throw std::invalid_argument("euler_maruyama: dt must lie in (0, 1e-3 * t_end]");
  }
  if (c.sigma2 < 0.0) throw std::invalid_argument("euler_maruyama: sigma2 must be >= 0");
  const auto steps = static_cast<std::int64_t>(std::llround(t_end / dt));
  const double h_step = t_end / static_cast<double>(steps);
  const double sigma = std::sqrt(c.sigma2);
  const double sq = std::sqrt(h_step);
  std::normal_distribution<double> normal(0.0, 1.0);
  double x = xi;
  for (std::int64_t k = 0; k < steps; ++k) {
    const double hx = h.form == NoiseForm::None ? 0.0 : h.h(x);
    const double drift = a(x) + c.e_c * hx * h.h_prime();
    x += drift * h_step;
    if (sigma > 0.0 && h.form != NoiseForm::None) x += sigma * hx * sq * normal(rng);
  }
  return x;
}

GaussianLaw linear_sde_law(const DriftFn& a, double sigma2, double xi, double t) {
  const double c0 = a.constant;
  const double c1 = a.linear;
  if (c1 == 0.0) return {xi + c0 * t, sigma2 * t};
  const double e = std::exp(c1 * t);
  return {xi * e + c0 * (e - 1.0) / c1, sigma2 * std::expm1(2.0 * c1 * t) / (2.0 * c1)};
}

std::vector<double> fastslow_ensemble(const FastSlowSpec& spec, std::size_t paths,
                                      std::size_t paths_per_stream,
                                      std::optional<std::size_t> burn_in, std::uint64_t seed,
                                      std::size_t* discarded) {
  const std::int64_t steps = step_count(spec);
  if (paths_per_stream < 1) throw std::invalid_argument("fastslow_ensemble: paths_per_stream must be >= 1");
  const std::size_t per = std::max<std::size_t>(
      1, std::min(paths_per_stream, kMaxStreamLength / static_cast<std::size_t>(std::max<std::int64_t>(steps, 1))));
  const std::size_t streams = (paths + per - 1) / per;
  const std::size_t chunks = std::min<std::size_t>(std::max<std::size_t>(streams, 1), 256);
  auto parts = map_chunks<std::vector<double>>(chunks, [&](std::size_t c) {
    const IndexRange r = split_range(streams, chunks, c);
    std::vector<double> out;
    for (std::size_t s = r.begin; s < r.end; ++s) {
      Rng rng = make_rng(seed, s);
      OrbitStream fast(spec.fast_map, rng, burn_in);
      const std::size_t used = std::min(per, paths - s * per);
      for (std::size_t p = 0; p < used; ++p) {
        const auto x = fastslow_endpoint(spec, fast);
        out.push_back(x ? *x : std::numeric_limits<double>::quiet_NaN());
      }
    }
    return out;
  });
  std::vector<double> all;
  std::size_t bad = 0;
  for (const auto& p : parts) {
    for (double x : p) {
      if (std::isnan(x)) {
        ++bad;
      } else {
        all.push_back(x);
      }
    }
  }
  if (discarded) *discarded = bad;
  return all;
}

HomogenisationReport homogenisation_compare(const FastSlowSpec& spec, const SdeCoefficients& coeffs,
                                            std::span<const std::int64_t> ns,
                                            ReferenceKind reference, const HomogenisationMc& mc) {
  HomogenisationReport report;
  report.coefficients = coeffs;
  const bool gaussian_available = spec.b.form != NoiseForm::Product;
  report.reference = reference == ReferenceKind::ExactGaussian && gaussian_available
                         ? ReferenceKind::ExactGaussian
                         : ReferenceKind::EulerMaruyama;
  const double sigma2 = spec.b.form == NoiseForm::None ? 0.0 : coeffs.sigma2;

  std::vector<double> ref;
  GaussianLaw law{};
  if (report.reference == ReferenceKind::EulerMaruyama) {
    const std::size_t chunks = default_chunks(mc.reference_paths);
    auto parts = map_chunks<std::vector<double>>(chunks, [&](std::size_t c) {
      Rng rng = make_rng(mc.seed, 0xE11, c);
      const IndexRange r = split_range(mc.reference_paths, chunks, c);
      std::vector<double> out;
      for (std::size_t i = 0; i < r.size(); ++i) {
        out.push_back(euler_maruyama({sigma2, coeffs.e_c}, spec.a, spec.b, spec.xi,
                                     mc.dt * spec.t_end, spec.t_end, rng));
      }
      return out;
    });
    for (const auto& p : parts) ref.insert(ref.end(), p.begin(), p.end());
  } else {
    law = linear_sde_law(spec.a, sigma2, spec.xi, spec.t_end);
  }
  const double ref_mean = report.reference == ReferenceKind::ExactGaussian ? law.mean : mean_of(ref);
  double ref_var = law.variance;
  if (report.reference == ReferenceKind::EulerMaruyama) {
    ref_var = 0.0;
    for (double x : ref) ref_var += (x - ref_mean) * (x - ref_mean);
    ref_var /= static_cast<double>(std::max<std::size_t>(ref.size(), 2) - 1);
  }

  for (std::size_t i = 0; i < ns.size(); ++i) {
    FastSlowSpec s = spec;
    s.n = ns[i];
    HomogenisationRow row;
    row.n = ns[i];
    const std::vector<double> xs =
        fastslow_ensemble(s, mc.paths, mc.paths_per_stream, mc.burn_in, mc.seed + 1 + i, &row.discarded);
    if (xs.empty()) throw std::runtime_error("homogenisation_compare: every trajectory overflowed");
    row.mean = mean_of(xs);
    double var = 0.0;
    for (double x : xs) var += (x - row.mean) * (x - row.mean);
    row.variance = var / static_cast<double>(std::max<std::size_t>(xs.size(), 2) - 1);
    row.mean_diff = row.mean - ref_mean;
    row.var_diff = row.variance - ref_var;
    if (report.reference == ReferenceKind::ExactGaussian) {
      if (law.variance > 0.0) {
        row.ks = ks_distance_to_cdf(xs, [&](double x) { return normal_cdf(x, law.mean, law.variance); });
      } else {
        const double point[] = {law.mean};
        row.ks = ks_distance(xs, point);
      }
      row.ks_critical = 1.358 / std::sqrt(static_cast<double>(xs.size()));
    } else {
      row.ks = ks_distance(xs, ref);
      row.ks_critical = ks_critical_95(xs.size(), ref.size());
    }
    report.rows.push_back(row);
    if (i + 1 == ns.size()) report.final_samples = xs;
  }
  report.reference_samples = std::move(ref);
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    if (report.rows[i].ks > report.rows[i - 1].ks + report.rows[i].ks_critical) report.nonincreasing = false;
  }
  return report;
}

}  // namespace homog
