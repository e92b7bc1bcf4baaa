#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "homog/random.hpp"
#include "homog/stats.hpp"

namespace homog {

/// sum_{r=a}^{b} r^{-beta}; direct for the first terms, Euler–Maclaurin for the rest.
double power_sum(double beta, std::int64_t a, std::int64_t b);

enum class ReturnLawKind { ParetoFloor, ExplicitPmf };

/// Law of the return time phi >= 1 to the tower base.
class ReturnTimeLaw {
 public:
  /// P(phi >= m) = m^{-beta} exactly for 1 <= m <= max_phi, realized as
  /// phi = min(floor(U^{-1/beta}), max_phi) with U uniform on (0,1].
  static ReturnTimeLaw pareto(double beta, std::int64_t max_phi = 1'000'000'000);
  /// pmf[m-1] = P(phi = m).
  static ReturnTimeLaw explicit_pmf(std::vector<double> pmf);

  ReturnLawKind kind() const { return kind_; }
  /// Tail exponent (0 for explicit laws).
  double beta() const { return beta_; }
  std::int64_t max_phi() const { return max_phi_; }

  /// Largest m with P(phi >= m) >= u, for u in (0,1].
  std::int64_t from_uniform(double u) const;
  std::int64_t sample(Rng& rng) const { return from_uniform(uniform_open_closed(rng)); }

  /// P(phi >= m).
  double survival(std::int64_t m) const;
  double mean() const { return mean_; }
  /// P(R > m) for the residual time R to the next return under the stationary law.
  double residual_survival(std::int64_t m) const;

  /// Stationary (height, phi): P(height = j, phi = m) = P(phi = m) / E[phi] for 0 <= j < m.
  std::pair<std::int64_t, std::int64_t> sample_stationary(Rng& rng) const;

 private:
  ReturnLawKind kind_ = ReturnLawKind::ParetoFloor;
  double beta_ = 0.0;
  std::int64_t max_phi_ = 0;
  double mean_ = 0.0;
  std::vector<double> survival_;        // explicit: survival_[m-1] = P(phi >= m)
  std::vector<double> residual_tail_;   // explicit: residual_tail_[m] = P(R > m)
  std::vector<double> size_biased_cdf_; // explicit
};

struct TowerSpec {
  ReturnTimeLaw law = ReturnTimeLaw::pareto(2.5);
  /// Base of the separation metric d_theta.
  double theta = 0.5;
};

/// Point (y, height) of a tower over a Bernoulli full-shift base.
struct TowerState {
  std::int64_t height = 0;
  std::int64_t phi = 1;
  /// psi: returns to the base level so far.
  std::int64_t returns = 0;
  /// Base symbols visited, starting with the initial one (first kHistoryCapacity kept).
  std::vector<std::uint32_t> history;
};

inline constexpr std::size_t kHistoryCapacity = 64;

std::int64_t sample_return_time(const TowerSpec& spec, Rng& rng);

/// Climbs one level, or returns to the base with a fresh (symbol, phi).
TowerState tower_step(TowerState state, const TowerSpec& spec, Rng& rng);

TowerState stationary_start(const TowerSpec& spec, Rng& rng);

enum class PsiEstimator {
  /// theta^{psi_n} along simulated trajectories.
  Direct,
  /// Conditional expectation given the return times up to the last return before n:
  /// sum_j theta^j P(no return in (t_j, n]), with the no-return-at-all term exact.
  Conditional,
};

struct TowerMc {
  std::size_t trials = 100'000;
  std::uint64_t seed = 1;
  PsiEstimator estimator = PsiEstimator::Conditional;
};

/// Monte Carlo estimate of int theta^{psi_n} d mu_Delta for each n (one pass).
std::vector<MomentEstimate> theta_psi_moments(const TowerSpec& spec, double theta,
                                              std::span<const std::int64_t> ns, const TowerMc& mc);

MomentEstimate theta_psi_moment(const TowerSpec& spec, double theta, std::int64_t n,
                                const TowerMc& mc);

/// Index of the first disagreement over the common recorded window; nullopt if none.
std::optional<std::size_t> separation_time(std::span<const std::uint32_t> a,
                                           std::span<const std::uint32_t> b);

/// theta^{s(a,b)}, 0 when the histories never separate.
double separation_distance(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b,
                           double theta);

}  // namespace homog
