#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homog/maps.hpp"
#include "homog/observables.hpp"
#include "homog/random.hpp"

namespace homog {

/// Closed-form drift a(x, y) = a_const + a_lin * x (no y dependence).
struct DriftFn {
  double constant = 0.0;
  double linear = 0.0;
  double operator()(double x) const { return constant + linear * x; }
  static DriftFn zero() { return {}; }
  static DriftFn ornstein_uhlenbeck() { return {0.0, -1.0}; }
  std::string describe() const;
};

enum class NoiseForm { None, Additive, Product };

/// b(x, y) = h(x) v(y) with h(x) = h0 + h1 * x (h = 1 for additive noise).
struct NoiseFn {
  NoiseForm form = NoiseForm::None;
  double h0 = 1.0;
  double h1 = 0.0;
  double h(double x) const { return form == NoiseForm::Product ? h0 + h1 * x : 1.0; }
  double h_prime() const { return form == NoiseForm::Product ? h1 : 0.0; }
  static NoiseFn none() { return {NoiseForm::None}; }
  static NoiseFn additive() { return {NoiseForm::Additive}; }
  static NoiseFn product(double h0, double h1) { return {NoiseForm::Product, h0, h1}; }
  std::string describe() const;
};

struct FastSlowSpec {
  DriftFn a;
  NoiseFn b;
  HolderObservable v = HolderObservable::constant(0.0);
  double xi = 0.0;
  std::int64_t n = 1;
  MapSystem fast_map = MapSystem::doubling();
  double t_end = 1.0;
};

inline constexpr double kOverflowGuard = 1e6;

/// x_{k+1} = x_k + a(x_k)/n + h(x_k) v(y_k)/sqrt(n), y_{k+1} = T y_k, for
/// k < floor(n t_end); returns X_n(t) = x_{floor(n t)} at each grid time, or
/// nullopt when |x| exceeds the overflow guard.
std::optional<std::vector<double>> fastslow_trajectory(const FastSlowSpec& spec, const Point& y0,
                                                       std::span<const double> grid);

/// Same recursion driven by an existing stream; returns X_n(t_end).
std::optional<double> fastslow_endpoint(const FastSlowSpec& spec, OrbitStream& fast);

struct GreenKuboMc {
  std::size_t orbits = 200;
  std::size_t orbit_len = 1 << 18;
  /// Windows of length 2^12 for the direct estimate.
  std::size_t direct_windows = 20'000;
  std::optional<std::size_t> burn_in;
  std::uint64_t seed = 1;
};

struct GreenKuboEstimate {
  double sigma2 = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double std_error = 0.0;
  /// n^{-1} E[S_v(n)^2] at n = direct_n.
  double direct = 0.0;
  double direct_std_error = 0.0;
  std::int64_t direct_n = 4096;
  std::int64_t max_lag = 0;
  bool consistent = true;
  std::string warning;
};

/// sigma^2 = c(0) + 2 sum_{l=1}^{max_lag} c(l) with a direct cross-check.
GreenKuboEstimate green_kubo_sigma(const MapSystem& map, const HolderObservable& v,
                                   std::int64_t max_lag, const GreenKuboMc& mc);

struct DriftCoefficient {
  double value = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  /// Same estimate at n / 2.
  double half_n_value = 0.0;
  double half_n_std_error = 0.0;
  std::int64_t n = 4096;
  bool converged = true;
  std::string warning;
};

struct DriftMc {
  std::size_t orbits = 20'000;
  std::optional<std::size_t> burn_in;
  std::uint64_t seed = 1;
};

/// n^{-1} E[SS_{v,v}(n)] at n and n/2.
DriftCoefficient iterated_drift_coeff(const MapSystem& map, const HolderObservable& v,
                                      std::int64_t n, const DriftMc& mc);

struct SdeCoefficients {
  double sigma2 = 0.0;
  double e_c = 0.0;
};

/// dX = (a(X) + E_c h(X) h'(X)) dt + sigma h(X) dW (Ito), X(0) = xi; returns X(t_end).
/// Requires dt <= 1e-3 t_end.
double euler_maruyama(const SdeCoefficients& c, const DriftFn& a, const NoiseFn& h, double xi,
                      double dt, double t_end, Rng& rng);

/// Mean and variance of X(t) for dX = (c0 + c1 X) dt + sigma dW.
struct GaussianLaw {
  double mean = 0.0;
  double variance = 0.0;
};
GaussianLaw linear_sde_law(const DriftFn& a, double sigma2, double xi, double t);

struct HomogenisationMc {
  std::size_t paths = 20'000;
  std::size_t reference_paths = 20'000;
  /// Paths per fast stream (consecutive windows).
  std::size_t paths_per_stream = 64;
  double dt = 1e-4;
  std::optional<std::size_t> burn_in;
  std::uint64_t seed = 1;
};

struct HomogenisationRow {
  std::int64_t n = 0;
  double ks = 0.0;
  double ks_critical = 0.0;
  double mean_diff = 0.0;
  double var_diff = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  std::size_t discarded = 0;
};

enum class ReferenceKind { EulerMaruyama, ExactGaussian };

struct HomogenisationReport {
  std::vector<HomogenisationRow> rows;
  SdeCoefficients coefficients;
  ReferenceKind reference = ReferenceKind::EulerMaruyama;
  /// True when each KS distance is at most the previous one plus the 95% critical value.
  bool nonincreasing = true;
  /// X_n(t_end) samples at the last n, and the Euler–Maruyama reference sample (empty for the exact law).
  std::vector<double> final_samples;
  std::vector<double> reference_samples;
};

/// Simulates X_n(t_end) for each n and compares it with the limiting SDE:
/// against its exact Gaussian law when available (linear drift, additive noise)
/// and `reference` asks for it, else against an Euler–Maruyama ensemble.
HomogenisationReport homogenisation_compare(const FastSlowSpec& spec, const SdeCoefficients& coeffs,
                                            std::span<const std::int64_t> ns,
                                            ReferenceKind reference, const HomogenisationMc& mc);

/// Final values X_n(t_end) of `paths` independent trajectories.
std::vector<double> fastslow_ensemble(const FastSlowSpec& spec, std::size_t paths,
                                      std::size_t paths_per_stream,
                                      std::optional<std::size_t> burn_in, std::uint64_t seed,
                                      std::size_t* discarded = nullptr);

}  // namespace homog
