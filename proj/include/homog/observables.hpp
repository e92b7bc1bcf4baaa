#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "homog/maps.hpp"

namespace homog {

enum class ObservableKind { Coordinate, Cosine, Affine, Constant, Tabulated };

/// Real-valued Hölder observable on [0,1]^d with a subtracted mean offset.
class HolderObservable {
 public:
  /// v(p) = p[coord].
  static HolderObservable coordinate(int coord);
  /// v(p) = cos(2*pi*freq*p[coord] + phase).
  static HolderObservable cosine(double freq, int coord = 0, double phase = 0.0);
  /// v(p) = slope*p[coord] + intercept.
  static HolderObservable affine(double slope, double intercept, int coord = 0);
  static HolderObservable constant(double c);
  /// Piecewise-linear interpolation of equally spaced samples on [0,1].
  static HolderObservable tabulated(std::vector<double> values, int coord = 0);

  ObservableKind kind() const { return kind_; }
  int coord() const { return coord_; }
  /// Hölder exponent carried as metadata.
  double eta() const { return eta_; }
  double mean_offset() const { return mean_offset_; }
  bool centered() const { return centered_; }
  /// Standard error of the Monte Carlo mean used for centering.
  double centering_std_error() const { return centering_se_; }
  std::string describe() const;

  /// Value before the offset is subtracted.
  double raw(double x) const;
  double raw(const Point& p) const { return raw(p[coord_]); }
  /// v(p) - mean_offset.
  double operator()(const Point& p) const { return raw(p) - mean_offset_; }
  double operator()(double x) const { return raw(x) - mean_offset_; }

  bool is_zero() const { return kind_ == ObservableKind::Constant && a_ - mean_offset_ == 0.0; }

  HolderObservable with_offset(double offset, double std_error, bool centered) const;

 private:
  HolderObservable(ObservableKind kind, int coord, double eta) : kind_(kind), coord_(coord), eta_(eta) {}

  ObservableKind kind_;
  int coord_ = 0;
  double eta_ = 1.0;
  double a_ = 0.0;  // freq | slope | constant
  double b_ = 0.0;  // phase | intercept
  std::vector<double> table_;
  double mean_offset_ = 0.0;
  double centering_se_ = 0.0;
  bool centered_ = false;
};

struct CenteringOptions {
  std::size_t samples = 1'000'000;
  std::optional<std::size_t> burn_in;
  std::uint64_t seed = 1;
  /// Consecutive orbit points per stationary start (time-and-ensemble average).
  std::size_t orbit_len = 1;
};

/// Estimates the integral of obs against the invariant measure and returns a
/// copy whose offset absorbs it. Applied to an already centered observable it
/// refines the existing offset.
HolderObservable center(const HolderObservable& obs, const MapSystem& map,
                        const CenteringOptions& mc);

/// Running maximum of |v(x)-v(y)|/d(x,y)^eta over uniformly sampled pairs in
/// [0,1]^dim (sup metric). A lower bound on the Hölder seminorm.
double holder_seminorm_estimate(const HolderObservable& obs, int dim, std::size_t pair_samples,
                                double eta, std::uint64_t seed);

}  // namespace homog
