#include "homog/tower.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "homog/parallel.hpp"

namespace homog {

double power_sum(double beta, std::int64_t a, std::int64_t b) {
  if (a < 1) throw std::invalid_argument("power_sum: a must be >= 1");
  if (a > b) return 0.0;
  constexpr std::int64_t kDirect = 64;
  const std::int64_t direct_end = std::min(b, a + kDirect - 1);
  double direct = 0.0;
  for (std::int64_t r = direct_end; r >= a; --r) direct += std::pow(static_cast<double>(r), -beta);
  if (direct_end == b) return direct;

  const double lo = static_cast<double>(direct_end + 1);
  const double hi = static_cast<double>(b);
  const auto f = [&](double r) { return std::pow(r, -beta); };
  const double c1 = beta;
  const double c3 = beta * (beta + 1.0) * (beta + 2.0);
  const double c5 = c3 * (beta + 3.0) * (beta + 4.0);
  // Derivatives of r^{-beta}: f' = -c1 r^{-beta-1}, f''' = -c3 r^{-beta-3}, f^(5) = -c5 r^{-beta-5}.
  const auto d1 = [&](double r) { return -c1 * std::pow(r, -beta - 1.0); };
  const auto d3 = [&](double r) { return -c3 * std::pow(r, -beta - 3.0); };
  const auto d5 = [&](double r) { return -c5 * std::pow(r, -beta - 5.0); };
  const double integral =
      beta == 1.0 ? std::log(hi / lo)
                  : (std::pow(lo, 1.0 - beta) - std::pow(hi, 1.0 - beta)) / (beta - 1.0);
  const double tail = integral + 0.5 * (f(lo) + f(hi)) + (d1(hi) - d1(lo)) / 12.0 -
                      (d3(hi) - d3(lo)) / 720.0 + (d5(hi) - d5(lo)) / 30240.0;
  return direct + tail;
}

ReturnTimeLaw ReturnTimeLaw::pareto(double beta, std::int64_t max_phi) {
  if (!(beta > 1.0)) throw std::invalid_argument("pareto return law needs beta > 1");
  if (max_phi < 1) throw std::invalid_argument("max_phi must be >= 1");
  ReturnTimeLaw law;
  law.kind_ = ReturnLawKind::ParetoFloor;
  law.beta_ = beta;
  law.max_phi_ = max_phi;
  law.mean_ = power_sum(beta, 1, max_phi);
  return law;
}

ReturnTimeLaw ReturnTimeLaw::explicit_pmf(std::vector<double> pmf) {
  if (pmf.empty()) throw std::invalid_argument("explicit return law: empty pmf");
  if (std::any_of(pmf.begin(), pmf.end(), [](double p) { return !(p >= 0.0); })) {
    throw std::invalid_argument("explicit return law: negative probability");
  }
  const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "explicit return law: probabilities sum to " << total;
    throw std::invalid_argument(msg.str());
  }
  for (double& p : pmf) p /= total;
  ReturnTimeLaw law;
  law.kind_ = ReturnLawKind::ExplicitPmf;
  law.max_phi_ = static_cast<std::int64_t>(pmf.size());
  const std::size_t m = pmf.size();
  law.survival_.assign(m, 0.0);
  double s = 0.0;
  for (std::size_t i = m; i-- > 0;) {
    s += pmf[i];
    law.survival_[i] = s;
  }
  law.survival_[0] = 1.0;
  law.mean_ = 0.0;
  for (std::size_t i = 0; i < m; ++i) law.mean_ += static_cast<double>(i + 1) * pmf[i];
  // residual_tail_[j] = P(R > j) = sum_{r > j} P(phi >= r) / E[phi], j = 0..m.
  law.residual_tail_.assign(m + 1, 0.0);
  double acc = 0.0;
  for (std::size_t j = m; j-- > 0;) {
    acc += law.survival_[j];  // survival_[j] = P(phi >= j+1)
    law.residual_tail_[j] = acc / law.mean_;
  }
  law.residual_tail_[0] = 1.0;
  law.size_biased_cdf_.resize(m);
  double c = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    c += static_cast<double>(i + 1) * pmf[i] / law.mean_;
    law.size_biased_cdf_[i] = c;
  }
  law.size_biased_cdf_.back() = 1.0;
  return law;
}

std::int64_t ReturnTimeLaw::from_uniform(double u) const {
  if (!(u > 0.0 && u <= 1.0)) throw std::domain_error("from_uniform: u must lie in (0,1]");
  if (kind_ == ReturnLawKind::ParetoFloor) {
    const double x = std::floor(std::pow(u, -1.0 / beta_));
    return x >= static_cast<double>(max_phi_) ? max_phi_ : std::max<std::int64_t>(1, static_cast<std::int64_t>(x));
  }
  // survival_ is nonincreasing; find the last index with survival >= u.
  const auto it = std::partition_point(survival_.begin(), survival_.end(),
                                       [u](double s) { return s >= u; });
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(it - survival_.begin()));
}

double ReturnTimeLaw::survival(std::int64_t m) const {
  if (m <= 1) return 1.0;
  if (m > max_phi_) return 0.0;
  if (kind_ == ReturnLawKind::ParetoFloor) return std::pow(static_cast<double>(m), -beta_);
  return survival_[static_cast<std::size_t>(m - 1)];
}

double ReturnTimeLaw::residual_survival(std::int64_t m) const {
  if (m <= 0) return 1.0;
  if (m >= max_phi_) return 0.0;
  if (kind_ == ReturnLawKind::ParetoFloor) return power_sum(beta_, m + 1, max_phi_) / mean_;
  return residual_tail_[static_cast<std::size_t>(m)];
}

std::pair<std::int64_t, std::int64_t> ReturnTimeLaw::sample_stationary(Rng& rng) const {
  if (kind_ == ReturnLawKind::ExplicitPmf) {
    const double u = uniform01(rng);
    const auto it = std::upper_bound(size_biased_cdf_.begin(), size_biased_cdf_.end(), u);
    const std::int64_t phi =
        std::min<std::int64_t>(static_cast<std::int64_t>(it - size_biased_cdf_.begin()) + 1, max_phi_);
    const std::int64_t height = std::uniform_int_distribution<std::int64_t>(0, phi - 1)(rng);
    return {height, phi};
  }
  // Height marginal: P(height = j) = (j+1)^{-beta} / E[phi], so height + 1 is
  // Zipf(beta) truncated at max_phi (Devroye's rejection sampler).
  const double s1 = beta_ - 1.0;
  const double b = std::pow(2.0, s1);
  std::int64_t j = 1;
  for (;;) {
    const double u = uniform_open_closed(rng);
    const double v = uniform01(rng);
    const double x = std::floor(std::pow(u, -1.0 / s1));
    if (!(x <= static_cast<double>(max_phi_))) continue;
    const double t = std::pow(1.0 + 1.0 / x, s1);
    if (v * x * (t - 1.0) / (b - 1.0) <= t / b) {
      j = static_cast<std::int64_t>(x);
      break;
    }
  }
  // Given height + 1 = j, P(phi >= m) = (j/m)^beta for j <= m <= max_phi.
  const double u = uniform_open_closed(rng);
  const double y = std::floor(static_cast<double>(j) * std::pow(u, -1.0 / beta_));
  const std::int64_t phi =
      y >= static_cast<double>(max_phi_) ? max_phi_ : std::max(j, static_cast<std::int64_t>(y));
  return {j - 1, phi};
}

std::int64_t sample_return_time(const TowerSpec& spec, Rng& rng) { return spec.law.sample(rng); }

namespace {
std::uint32_t draw_symbol(Rng& rng) { return static_cast<std::uint32_t>(rng() >> 32); }
}  // namespace

TowerState tower_step(TowerState state, const TowerSpec& spec, Rng& rng) {
  if (state.height < state.phi - 1) {
    ++state.height;
    return state;
  }
  state.height = 0;
  ++state.returns;
  const std::uint32_t symbol = draw_symbol(rng);
  state.phi = spec.law.sample(rng);
  if (state.history.size() < kHistoryCapacity) state.history.push_back(symbol);
  return state;
}

TowerState stationary_start(const TowerSpec& spec, Rng& rng) {
  TowerState s;
  const auto [height, phi] = spec.law.sample_stationary(rng);
  s.height = height;
  s.phi = phi;
  s.history.push_back(draw_symbol(rng));
  return s;
}

std::vector<MomentEstimate> theta_psi_moments(const TowerSpec& spec, double theta,
                                              std::span<const std::int64_t> ns, const TowerMc& mc) {
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in (0,1]");
  if (ns.empty()) return {};
  if (*std::min_element(ns.begin(), ns.end()) < 1) throw std::invalid_argument("n must be >= 1");
  if (mc.trials < 1) throw std::invalid_argument("trials must be >= 1");
  const ReturnTimeLaw& law = spec.law;
  const std::size_t nn = ns.size();
  const std::int64_t n_max = *std::max_element(ns.begin(), ns.end());

  // P(phi > m) = survival(m + 1) for m = 0..n_max.
  std::vector<double> no_return(static_cast<std::size_t>(n_max) + 1);
  for (std::int64_t m = 0; m <= n_max; ++m) no_return[static_cast<std::size_t>(m)] = law.survival(m + 1);
  std::vector<double> exact_zero_term(nn);
  double smallest = 1.0;
  for (std::size_t i = 0; i < nn; ++i) {
    exact_zero_term[i] = law.residual_survival(ns[i]);
    smallest = std::min(smallest, exact_zero_term[i]);
  }
  // Terms beyond j contribute at most theta^{j+1}/(1-theta).
  const double cutoff = theta < 1.0 ? 1e-15 * smallest * (1.0 - theta) : 0.0;

  const std::size_t chunks = default_chunks(mc.trials);
  auto parts = map_chunks<std::vector<double>>(chunks, [&](std::size_t c) {
    Rng rng = make_rng(mc.seed, c);
    const IndexRange r = split_range(mc.trials, chunks, c);
    std::vector<double> out(r.size() * nn, 0.0);
    for (std::size_t t = 0; t < r.size(); ++t) {
      double* z = &out[t * nn];
      const auto [height, phi] = law.sample_stationary(rng);
      std::int64_t when = phi - height;  // time of the first return
      if (mc.estimator == PsiEstimator::Direct) {
        std::int64_t psi = 0;
        std::vector<std::int64_t> psi_at(nn, 0);
        // Advance through returns; record psi_n for every n.
        std::vector<std::size_t> order(nn);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ns[a] < ns[b]; });
        std::size_t next = 0;
        while (next < nn) {
          while (next < nn && when > ns[order[next]]) psi_at[order[next++]] = psi;
          if (next == nn) break;
          ++psi;
          when += law.sample(rng);
        }
        for (std::size_t i = 0; i < nn; ++i) z[i] = std::pow(theta, static_cast<double>(psi_at[i]));
        continue;
      }
      for (std::size_t i = 0; i < nn; ++i) z[i] = exact_zero_term[i];
      double weight = 1.0;
      for (std::int64_t j = 1; when <= n_max; ++j) {
        weight = std::pow(theta, static_cast<double>(j));
        if (weight < cutoff) break;
        for (std::size_t i = 0; i < nn; ++i) {
          if (when <= ns[i]) z[i] += weight * no_return[static_cast<std::size_t>(ns[i] - when)];
        }
        when += law.sample(rng);
      }
    }
    return out;
  });

  std::vector<MomentEstimate> out;
  std::vector<double> values;
  values.reserve(mc.trials);
  for (std::size_t i = 0; i < nn; ++i) {
    values.clear();
    for (const auto& part : parts) {
      for (std::size_t t = i; t < part.size(); t += nn) values.push_back(part[t]);
    }
    out.push_back(lp_norm_from_samples(values, 1.0, mc.seed + i, ns[i]));
  }
  return out;
}

MomentEstimate theta_psi_moment(const TowerSpec& spec, double theta, std::int64_t n,
                                const TowerMc& mc) {
  const std::int64_t ns[] = {n};
  return theta_psi_moments(spec, theta, ns, mc).front();
}

std::optional<std::size_t> separation_time(std::span<const std::uint32_t> a,
                                           std::span<const std::uint32_t> b) {
  const std::size_t m = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < m; ++i) {
    if (a[i] != b[i]) return i;
  }
  return std::nullopt;
}

double separation_distance(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b,
                           double theta) {
  const auto s = separation_time(a, b);
  return s ? std::pow(theta, static_cast<double>(*s)) : 0.0;
}

}  // namespace homog
