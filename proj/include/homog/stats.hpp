#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "homog/maps.hpp"
#include "homog/observables.hpp"
#include "homog/random.hpp"

namespace homog {

/// Monte Carlo estimate of an L^p norm (or of a plain expectation when p = 1
/// and the sample is nonnegative) with a 95% percentile-bootstrap interval.
struct MomentEstimate {
  double p = 1.0;
  std::int64_t n = 0;
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
};

struct ConfidenceInterval {
  double low = 0.0;
  double high = 0.0;
};

struct BootstrapOptions {
  std::size_t resamples = 1000;
  /// Larger samples are reduced to this many contiguous batch means first.
  std::size_t max_groups = 1000;
  double level = 0.95;
  std::uint64_t seed = 1;
};

/// Percentile bootstrap interval for transform(mean(values)).
ConfidenceInterval bootstrap_mean_ci(std::span<const double> values,
                                     const std::function<double(double)>& transform,
                                     const BootstrapOptions& opts);

/// Standard error of the sample mean.
double standard_error(std::span<const double> values);
double mean_of(std::span<const double> values);
/// Standard error from `groups` contiguous batch means; robust to serial
/// dependence between neighbouring samples.
double batched_standard_error(std::span<const double> values, std::size_t groups = 1000);

using Sampler = std::function<double(Rng&)>;

/// ((1/N) sum |x_i|^p)^{1/p} of an existing sample, with bootstrap interval.
MomentEstimate lp_norm_from_samples(std::span<const double> values, double p, std::uint64_t seed,
                                    std::int64_t n = 0);

/// Draws `trials` values from the sampler (deterministically chunked by seed)
/// and estimates their L^p norm. Requires p >= 1 and trials >= 100.
MomentEstimate lp_norm_estimate(const Sampler& sampler, double p, std::size_t trials,
                                std::uint64_t seed);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_std_error = 0.0;
};

/// (Weighted) least squares y = intercept + slope * x.
LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys,
                     std::span<const double> weights = {});

/// Log-log regression value ~ exp(log_prefactor) * n^exponent.
struct ScalingFit {
  double exponent = 0.0;
  double log_prefactor = 0.0;
  double r_squared = 0.0;
  double exponent_std_error = 0.0;
  std::vector<std::pair<double, double>> points;
};

/// Ordinary least squares of log(value) on log(n). Needs >= 3 points, all values > 0.
ScalingFit scaling_fit(std::span<const std::pair<double, double>> points);
/// Weighted variant; weights apply to log(value).
ScalingFit scaling_fit(std::span<const std::pair<double, double>> points,
                       std::span<const double> weights);
/// Inverse-variance weights for log(value) given standard errors of value.
std::vector<double> log_weights(std::span<const double> values, std::span<const double> std_errors);

struct CorrelationMc {
  std::size_t orbits = 1000;
  std::size_t orbit_len = 100'000;
  std::optional<std::size_t> burn_in;
  std::uint64_t seed = 1;
};

struct CorrelationEstimate {
  std::int64_t lag = 0;
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double std_error = 0.0;
};

/// Estimates int v * w o T^lag dmu - int v dmu int w dmu for each lag by
/// averaging over all admissible times of an ensemble of independent
/// stationary orbits. Intervals come from a bootstrap over orbits.
std::vector<CorrelationEstimate> cross_correlation(const MapSystem& map, const HolderObservable& v,
                                                   const HolderObservable& w,
                                                   std::span<const std::int64_t> lags,
                                                   const CorrelationMc& mc);

std::vector<CorrelationEstimate> autocorrelation(const MapSystem& map, const HolderObservable& v,
                                                 std::span<const std::int64_t> lags,
                                                 const CorrelationMc& mc);

/// Two-sample Kolmogorov–Smirnov distance.
double ks_distance(std::span<const double> a, std::span<const double> b);
/// One-sample distance to a continuous CDF.
double ks_distance_to_cdf(std::span<const double> a, const std::function<double(double)>& cdf);
/// Asymptotic two-sample critical value at level 0.05.
double ks_critical_95(std::size_t n_a, std::size_t n_b);

double normal_cdf(double x, double mean, double variance);

struct IndependentSumRow {
  int k = 0;
  double lhs = 0.0;  ///< E|X_0 + ... + X_{k-1}|^p
  double rhs = 0.0;  ///< bound without the constant
  double ratio = 0.0;
};

struct IndependentSumReport {
  double p = 0.0;
  std::vector<IndependentSumRow> rows;
  double c_fit = 0.0;
  /// Log-log slope of ratio against k over all rows.
  double ratio_slope = 0.0;
  bool bounded = false;
};

/// Moment inequalities for independent mean-zero sums: for p > 2 the bound is
/// (sum E X_i^2)^{p/2} + sum E|X_i|^p, for 1 <= p <= 2 it is sum E|X_i|^p.
IndependentSumReport independent_sum_moment_check(const Sampler& dist, std::span<const int> ks,
                                                  double p, std::size_t trials,
                                                  std::uint64_t seed);

}  // namespace homog
