#include "homog/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "homog/parallel.hpp"
#include "homog/summation.hpp"

namespace homog {

double mean_of(std::span<const double> values) {
  if (values.empty()) return 0.0;
  // Shifting by the first element keeps constant samples exact.
  const double shift = values.front();
  std::vector<double> d(values.size());
  std::transform(values.begin(), values.end(), d.begin(), [&](double x) { return x - shift; });
  return shift + pairwise_sum(d) / static_cast<double>(values.size());
}

double standard_error(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double m = mean_of(values);
  NeumaierSum ss;
  for (double x : values) ss.add((x - m) * (x - m));
  return std::sqrt(ss.value() / static_cast<double>(n - 1) / static_cast<double>(n));
}

double batched_standard_error(std::span<const double> values, std::size_t groups) {
  if (values.size() <= groups) return standard_error(values);
  std::vector<double> means(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    const IndexRange r = split_range(values.size(), groups, g);
    means[g] = mean_of(values.subspan(r.begin, r.size()));
  }
  return standard_error(means);
}

ConfidenceInterval bootstrap_mean_ci(std::span<const double> values,
                                     const std::function<double(double)>& transform,
                                     const BootstrapOptions& opts) {
  if (values.empty()) throw std::invalid_argument("bootstrap_mean_ci: empty sample");
  std::vector<double> groups;
  if (values.size() > opts.max_groups) {
    groups.reserve(opts.max_groups);
    for (std::size_t g = 0; g < opts.max_groups; ++g) {
      const IndexRange r = split_range(values.size(), opts.max_groups, g);
      groups.push_back(mean_of(values.subspan(r.begin, r.size())));
    }
  } else {
    groups.assign(values.begin(), values.end());
  }
  const std::size_t m = groups.size();
  Rng rng = make_rng(opts.seed, 0xB007);
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  std::vector<double> stats(opts.resamples);
  std::vector<double> draw(m);
  for (auto& s : stats) {
    for (auto& d : draw) d = groups[pick(rng)];
    s = transform(mean_of(draw));
  }
  std::sort(stats.begin(), stats.end());
  const double tail = 0.5 * (1.0 - opts.level);
  const auto at = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(stats.size() - 1)));
    return stats[std::min(idx, stats.size() - 1)];
  };
  return {at(tail), at(1.0 - tail)};
}

MomentEstimate lp_norm_from_samples(std::span<const double> values, double p, std::uint64_t seed,
                                    std::int64_t n) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
  if (values.empty()) throw std::invalid_argument("lp_norm: empty sample");
  MomentEstimate est;
  est.p = p;
  est.n = n;
  est.trials = values.size();
  est.seed = seed;

  const double first = std::abs(values.front());
  const bool degenerate = std::all_of(values.begin(), values.end(),
                                      [&](double x) { return std::abs(x) == first; });
  if (degenerate) {
    est.value = est.ci_low = est.ci_high = first;
    return est;
  }
  std::vector<double> powered(values.size());
  std::transform(values.begin(), values.end(), powered.begin(),
                 [&](double x) { return std::pow(std::abs(x), p); });
  const double m = mean_of(powered);
  const auto root = [p](double x) { return std::pow(std::max(x, 0.0), 1.0 / p); };
  est.value = root(m);
  const double se_mean = batched_standard_error(powered);
  est.std_error = m > 0.0 ? se_mean * est.value / (p * m) : 0.0;
  const ConfidenceInterval ci = bootstrap_mean_ci(powered, root, {.seed = seed});
  est.ci_low = std::min(ci.low, est.value);
  est.ci_high = std::max(ci.high, est.value);
  return est;
}

MomentEstimate lp_norm_estimate(const Sampler& sampler, double p, std::size_t trials,
                                std::uint64_t seed) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm_estimate: p must be >= 1");
  if (trials < 100) throw std::invalid_argument("lp_norm_estimate: trials must be >= 100");
  const std::size_t chunks = default_chunks(trials);
  auto parts = map_chunks<std::vector<double>>(chunks, [&](std::size_t c) {
    Rng rng = make_rng(seed, c);
    const IndexRange r = split_range(trials, chunks, c);
    std::vector<double> out(r.size());
    for (auto& x : out) x = sampler(rng);
    return out;
  });
  std::vector<double> all;
  all.reserve(trials);
  for (const auto& part : parts) all.insert(all.end(), part.begin(), part.end());
  return lp_norm_from_samples(all, p, seed);
}

LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys,
                     std::span<const double> weights) {
  const std::size_t n = xs.size();
  if (n != ys.size() || (!weights.empty() && weights.size() != n)) {
    throw std::invalid_argument("linear_fit: length mismatch");
  }
  if (n < 2) throw std::invalid_argument("linear_fit: need at least two points");
  auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w(i);
    sx += w(i) * xs[i];
    sy += w(i) * ys[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w(i) * (xs[i] - mx) * (xs[i] - mx);
    sxy += w(i) * (xs[i] - mx) * (ys[i] - my);
    syy += w(i) * (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("linear_fit: abscissae are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - fit.intercept - fit.slope * xs[i];
    sse += w(i) * r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  if (n > 2) {
    fit.slope_std_error = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  }
  return fit;
}

namespace {

ScalingFit scaling_fit_impl(std::span<const std::pair<double, double>> points,
                            std::span<const double> weights) {
  if (points.size() < 3) throw std::invalid_argument("scaling_fit: need at least 3 points");
  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& [n, value] : points) {
    if (!(n > 0.0) || !(value > 0.0)) {
      throw std::invalid_argument("scaling_fit: n and value must be positive");
    }
    lx.push_back(std::log(n));
    ly.push_back(std::log(value));
  }
  const LinearFit lf = linear_fit(lx, ly, weights);
  ScalingFit fit;
  fit.exponent = lf.slope;
  fit.log_prefactor = lf.intercept;
  fit.r_squared = lf.r_squared;
  fit.exponent_std_error = lf.slope_std_error;
  fit.points.assign(points.begin(), points.end());
  return fit;
}

}  // namespace

ScalingFit scaling_fit(std::span<const std::pair<double, double>> points) {
  return scaling_fit_impl(points, {});
}

ScalingFit scaling_fit(std::span<const std::pair<double, double>> points,
                       std::span<const double> weights) {
  return scaling_fit_impl(points, weights);
}

std::vector<double> log_weights(std::span<const double> values, std::span<const double> std_errors) {
  std::vector<double> w(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double rel = std_errors[i] / std::abs(values[i]);
    w[i] = rel > 0.0 ? 1.0 / (rel * rel) : 1e12;
  }
  return w;
}

namespace {

struct OrbitCorrelation {
  std::vector<double> product_means;  // one per lag
  double mean_v = 0.0;
  double mean_w = 0.0;
};

}  // namespace

std::vector<CorrelationEstimate> cross_correlation(const MapSystem& map, const HolderObservable& v,
                                                   const HolderObservable& w,
                                                   std::span<const std::int64_t> lags,
                                                   const CorrelationMc& mc) {
  if (lags.empty()) return {};
  const std::int64_t max_lag = *std::max_element(lags.begin(), lags.end());
  if (*std::min_element(lags.begin(), lags.end()) < 0) {
    throw std::invalid_argument("autocorrelation: negative lag");
  }
  if (mc.orbits < 2) throw std::invalid_argument("autocorrelation: need at least 2 orbits");
  if (static_cast<std::int64_t>(mc.orbit_len) <= max_lag) {
    throw std::invalid_argument("autocorrelation: orbit_len must exceed the largest lag");
  }
  const std::size_t ring = std::bit_ceil(static_cast<std::size_t>(max_lag) + 1);
  const std::size_t mask = ring - 1;
  const std::size_t nl = lags.size();
  const std::size_t chunks = std::min<std::size_t>(mc.orbits, 256);

  auto parts = map_chunks<std::vector<OrbitCorrelation>>(chunks, [&](std::size_t c) {
    Rng rng = make_rng(mc.seed, c);
    const IndexRange r = split_range(mc.orbits, chunks, c);
    std::vector<OrbitCorrelation> out;
    std::vector<double> past(ring, 0.0);
    std::vector<double> prod(nl);
    for (std::size_t o = r.begin; o < r.end; ++o) {
      OrbitStream s(map, rng, mc.burn_in);
      std::fill(prod.begin(), prod.end(), 0.0);
      double sv = 0.0, sw = 0.0;
      for (std::size_t t = 0; t < mc.orbit_len; ++t) {
        const Point& x = s.current();
        const double vt = v(x);
        const double wt = w(x);
        past[t & mask] = vt;
        sv += vt;
        sw += wt;
        for (std::size_t j = 0; j < nl; ++j) {
          const auto lag = static_cast<std::size_t>(lags[j]);
          if (t >= lag) prod[j] += past[(t - lag) & mask] * wt;
        }
        s.advance();
      }
      OrbitCorrelation oc;
      oc.product_means.resize(nl);
      for (std::size_t j = 0; j < nl; ++j) {
        oc.product_means[j] = prod[j] / static_cast<double>(mc.orbit_len - static_cast<std::size_t>(lags[j]));
      }
      oc.mean_v = sv / static_cast<double>(mc.orbit_len);
      oc.mean_w = sw / static_cast<double>(mc.orbit_len);
      out.push_back(std::move(oc));
    }
    return out;
  });

  std::vector<OrbitCorrelation> orbits;
  for (auto& p : parts) std::move(p.begin(), p.end(), std::back_inserter(orbits));
  std::vector<double> mv, mw;
  for (const auto& o : orbits) {
    mv.push_back(o.mean_v);
    mw.push_back(o.mean_w);
  }
  const double mean_v = mean_of(mv);
  const double mean_w = mean_of(mw);

  std::vector<CorrelationEstimate> out;
  std::vector<double> per_orbit(orbits.size());
  for (std::size_t j = 0; j < nl; ++j) {
    for (std::size_t o = 0; o < orbits.size(); ++o) {
      per_orbit[o] = orbits[o].product_means[j] - mean_v * mean_w;
    }
    CorrelationEstimate e;
    e.lag = lags[j];
    e.value = mean_of(per_orbit);
    e.std_error = standard_error(per_orbit);
    const ConfidenceInterval ci =
        bootstrap_mean_ci(per_orbit, [](double x) { return x; }, {.seed = mc.seed + j});
    e.ci_low = std::min(ci.low, e.value);
    e.ci_high = std::max(ci.high, e.value);
    out.push_back(e);
  }
  return out;
}

std::vector<CorrelationEstimate> autocorrelation(const MapSystem& map, const HolderObservable& v,
                                                 std::span<const std::int64_t> lags,
                                                 const CorrelationMc& mc) {
  return cross_correlation(map, v, v, lags, mc);
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance: empty sample");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == t) ++i;
    while (j < y.size() && y[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

double ks_distance_to_cdf(std::span<const double> a, const std::function<double(double)>& cdf) {
  if (a.empty()) throw std::invalid_argument("ks_distance_to_cdf: empty sample");
  std::vector<double> x(a.begin(), a.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_95(std::size_t n_a, std::size_t n_b) {
  const double na = static_cast<double>(n_a);
  const double nb = static_cast<double>(n_b);
  return 1.358 * std::sqrt((na + nb) / (na * nb));
}

double normal_cdf(double x, double mean, double variance) {
  if (variance <= 0.0) return x < mean ? 0.0 : 1.0;
  return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * variance));
}

IndependentSumReport independent_sum_moment_check(const Sampler& dist, std::span<const int> ks,
                                                  double p, std::size_t trials,
                                                  std::uint64_t seed) {
  if (ks.empty()) throw std::invalid_argument("independent_sum_moment_check: no k values");
  if (!(p >= 1.0)) throw std::invalid_argument("independent_sum_moment_check: p must be >= 1");
  const int k_max = *std::max_element(ks.begin(), ks.end());
  const std::size_t nk = ks.size();
  struct Part {
    std::vector<double> lhs;
    double m2 = 0.0;
    double mp = 0.0;
  };
  const std::size_t chunks = default_chunks(trials);
  auto parts = map_chunks<Part>(chunks, [&](std::size_t c) {
    Rng rng = make_rng(seed, c);
    const IndexRange r = split_range(trials, chunks, c);
    Part part;
    part.lhs.assign(nk, 0.0);
    std::vector<double> xs(static_cast<std::size_t>(k_max));
    for (std::size_t t = r.begin; t < r.end; ++t) {
      for (auto& x : xs) {
        x = dist(rng);
        part.m2 += x * x;
        part.mp += std::pow(std::abs(x), p);
      }
      for (std::size_t j = 0; j < nk; ++j) {
        double s = 0.0;
        for (int i = 0; i < ks[j]; ++i) s += xs[static_cast<std::size_t>(i)];
        part.lhs[j] += std::pow(std::abs(s), p);
      }
    }
    return part;
  });
  std::vector<double> lhs(nk, 0.0);
  double m2 = 0.0, mp = 0.0;
  for (const Part& part : parts) {
    for (std::size_t j = 0; j < nk; ++j) lhs[j] += part.lhs[j];
    m2 += part.m2;
    mp += part.mp;
  }
  const double draws = static_cast<double>(trials) * k_max;
  m2 /= draws;
  mp /= draws;

  IndependentSumReport rep;
  rep.p = p;
  std::vector<double> lk, lr;
  for (std::size_t j = 0; j < nk; ++j) {
    IndependentSumRow row;
    row.k = ks[j];
    row.lhs = lhs[j] / static_cast<double>(trials);
    const double k = ks[j];
    row.rhs = p > 2.0 ? std::pow(k * m2, p / 2.0) + k * mp : k * mp;
    row.ratio = row.rhs > 0.0 ? row.lhs / row.rhs : 0.0;
    rep.c_fit = std::max(rep.c_fit, row.ratio);
    if (row.ratio > 0.0) {
      lk.push_back(std::log(k));
      lr.push_back(std::log(row.ratio));
    }
    rep.rows.push_back(row);
  }
  if (lk.size() >= 2) rep.ratio_slope = linear_fit(lk, lr).slope;
  // Bounded: the ratio settles, growing by at most 10% over the last step in k.
  const std::size_t m = rep.rows.size();
  const bool settled = m < 2 || rep.rows[m - 2].ratio == 0.0 ||
                       rep.rows[m - 1].ratio <= 1.1 * rep.rows[m - 2].ratio;
  rep.bounded = std::isfinite(rep.c_fit) && settled;
  return rep;
}

}  // namespace homog
