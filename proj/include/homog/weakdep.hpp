#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homog/maps.hpp"
#include "homog/observables.hpp"
#include "homog/sums.hpp"

namespace homog {

enum class FunctionalKind { ProductOfBoundedLipschitz, PowerOfSum, ProductOfObservables, UserDefined };

/// Bounded functional of k reals (or q points) with known sup and Lipschitz
/// bounds. Lipschitz constants refer to the l1 norm on R^k.
class Functional {
 public:
  /// prod_i tanh(y_i): sup 1, Lip 1.
  static Functional tanh_product(int arity);
  /// |y_0 + ... + y_{k-1}|^p on [-R,R]^k: sup (kR)^p, Lip p (kR)^{p-1}.
  static Functional power_of_sum(int arity, double p, double radius);
  /// prod_i factors[i](y_i) on points; split index used by the two-orbit integral.
  static Functional product_of(std::vector<HolderObservable> factors, int split);
  static Functional user(int arity, std::function<double(std::span<const double>)> fn,
                         double sup_bound, double lipschitz_bound, int split = 1);

  FunctionalKind kind() const { return kind_; }
  int arity() const { return arity_; }
  double sup_bound() const { return sup_bound_; }
  double lipschitz_bound() const { return lipschitz_bound_; }
  int split() const { return split_; }
  double exponent() const { return p_; }
  double radius() const { return radius_; }
  const std::vector<HolderObservable>& factors() const { return factors_; }
  std::string describe() const;

  /// Evaluation on reals; PowerOfSum first clamps each y_i into [-R,R].
  double operator()(std::span<const double> y) const;
  /// Evaluation on points (first coordinates unless the factors say otherwise).
  double at_points(std::span<const Point> y) const;

 private:
  Functional() = default;
  FunctionalKind kind_ = FunctionalKind::UserDefined;
  int arity_ = 1;
  double sup_bound_ = 0.0;
  double lipschitz_bound_ = 0.0;
  int split_ = 1;
  double p_ = 1.0;
  double radius_ = 0.0;
  std::vector<HolderObservable> factors_;
  std::function<double(std::span<const double>)> fn_;
};

/// X_i = S_v(a_{2i}, a_{2i+1}) along the orbit of `start`, i = 0..k-1.
std::vector<double> block_rvs(const MapSystem& map, const HolderObservable& v,
                              const BlockScheme& scheme, const Point& start);

/// One draw of (X^_0, ..., X^_{k-1}): coordinate i is a Birkhoff sum of length
/// block_length(i) along its own independent stationary orbit.
std::vector<double> independent_copies(const MapSystem& map, const HolderObservable& v,
                                       const BlockScheme& scheme, Rng& rng,
                                       std::optional<std::size_t> burn_in = std::nullopt);

struct WeakdepMc {
  std::size_t trials = 50'000;
  /// Consecutive trials drawn from the same group of k+1 streams.
  std::size_t trials_per_stream = 100;
  std::optional<std::size_t> burn_in;
  std::uint64_t seed = 1;
};

struct WeakdepRow {
  std::int64_t n = 0;
  std::int64_t k = 0;
  /// n / (2k)
  std::int64_t gap = 0;
  double mean_dynamic = 0.0;
  double mean_independent = 0.0;
  /// |mean_dynamic - mean_independent|
  double delta = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double std_error = 0.0;
  bool below_noise = false;
};

struct WeakdepReport {
  std::vector<WeakdepRow> rows;
  /// First gap with delta < 2 std_error, if any.
  std::optional<std::int64_t> horizon;
};

/// Compares E F(X_0..X_{k-1}) with E F(X^_0..X^_{k-1}) for each n. The dynamic
/// blocks of every n come from one orbit of length max(n) per trial; the
/// independent copies come from k further streams.
WeakdepReport weakdep_gap_experiment(const MapSystem& map, const HolderObservable& v,
                                     const Functional& f, std::span<const std::int64_t> ns,
                                     std::int64_t k, const WeakdepMc& mc);

struct FcbMc {
  /// Independent stream pairs (A, B).
  std::size_t pairs = 256;
  /// Start times averaged over per window.
  std::size_t window = 1 << 16;
  std::size_t windows_per_stream = 16;
  std::optional<std::size_t> burn_in;
  std::uint64_t seed = 1;
};

struct FcbEstimate {
  std::vector<std::int64_t> times;
  /// times[split] - times[split-1]
  std::int64_t gap = 0;
  double single = 0.0;
  double split = 0.0;
  double delta = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double std_error = 0.0;
  bool below_noise = false;
};

/// |int G(T^{n_0}x, ..., T^{n_{q-1}}x) dmu - int int G(T^{n_0}x_0, ..., T^{n_{p-1}}x_0,
/// T^{n_p}x_1, ..., T^{n_{q-1}}x_1) dmu dmu| for each time vector, sharing orbits.
/// Both integrals are time-and-ensemble averages over independent stream pairs,
/// symmetrized in (A, B).
std::vector<FcbEstimate> fcb_functional_experiment(const MapSystem& map, const Functional& g,
                                                   std::span<const std::vector<std::int64_t>> times,
                                                   const FcbMc& mc);

FcbEstimate fcb_functional_experiment(const MapSystem& map, const Functional& g,
                                      std::span<const std::int64_t> times, const FcbMc& mc);

/// Time vectors for a gap scan: `head` (length split) stays fixed and `tail`
/// is shifted to start `gap` after the last head time.
std::vector<std::vector<std::int64_t>> fcb_gap_times(std::span<const std::int64_t> head,
                                                     std::span<const std::int64_t> tail,
                                                     std::span<const std::int64_t> gaps);

struct LipschitzCheck {
  std::size_t pairs = 0;
  std::size_t sup_violations = 0;
  std::size_t lipschitz_violations = 0;
  double max_abs = 0.0;
  double max_quotient = 0.0;
};

/// Samples pairs in [-R,R]^k and compares |F| and |F(y)-F(y')|/|y-y'|_1 with
/// the functional's declared bounds.
LipschitzCheck lipschitz_check(const Functional& f, double radius, std::size_t pairs,
                               std::uint64_t seed);

}  // namespace homog
