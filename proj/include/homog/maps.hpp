#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "homog/random.hpp"

namespace homog {

enum class MapKind { Doubling, Lsv, Baker };

std::string to_string(MapKind kind);
MapKind parse_map_kind(const std::string& name);

/// A point of [0,1] (dim 1) or [0,1]^2 (dim 2).
class Point {
 public:
  Point() = default;
  explicit Point(double x) : coords_{x, 0.0}, dim_(1) {}
  Point(double x1, double x2) : coords_{x1, x2}, dim_(2) {}

  int dim() const { return dim_; }
  double operator[](int i) const { return coords_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return coords_[static_cast<std::size_t>(i)]; }
  double x() const { return coords_[0]; }

  friend bool operator==(const Point&, const Point&) = default;

 private:
  std::array<double, 2> coords_{0.0, 0.0};
  int dim_ = 1;
};

/// Tolerance used for g^{-1} inside the Baker step.
inline constexpr double kDefaultInverseTol = 1e-13;

/// Left branch of the LSV map, g(x) = x(1 + 2^alpha x^alpha) on [0, 1/2].
double lsv_left_branch(double x, double alpha);

/// Liverani–Saussol–Vaienti map. Throws std::domain_error outside x in [0,1], alpha in (0,1).
double lsv_step(double x, double alpha);

/// Inverse of the left branch: y in [0,1/2] with |g(y) - u| <= tol. Bisection
/// followed by two Newton polish steps. Throws std::runtime_error on non-convergence.
double g_inverse(double u, double alpha, double tol = kDefaultInverseTol, int max_iter = 200);

/// Intermittent Baker's map on the unit square.
Point baker_step(const Point& p, double alpha, double tol = kDefaultInverseTol);

/// x -> 2x mod 1 (exact in binary floating point).
double doubling_step(double x);

/// A deterministic map of the unit interval or square together with its
/// invariant-measure sampling defaults.
class MapSystem {
 public:
  static MapSystem doubling();
  static MapSystem lsv(double alpha);
  static MapSystem baker(double alpha);
  static MapSystem make(MapKind kind, double alpha);

  MapKind kind() const { return kind_; }
  /// Intermittency parameter; 0 for the doubling map.
  double alpha() const { return alpha_; }
  /// Tail exponent 1/alpha; +infinity for the doubling map.
  double beta() const;
  int state_dim() const { return kind_ == MapKind::Baker ? 2 : 1; }
  std::size_t default_burn_in() const { return kind_ == MapKind::Doubling ? 1000 : 10000; }
  std::string name() const;

  /// One step, with coordinates clamped into [0,1].
  Point step(const Point& p) const;
  /// First-coordinate step (exact for all three maps).
  double step_x(double x) const;

  /// Uniform draw on [0,1]^d.
  Point uniform_point(Rng& rng) const;

 private:
  MapSystem(MapKind kind, double alpha) : kind_(kind), alpha_(alpha) {}
  MapKind kind_;
  double alpha_;
};

/// Elements 0..n of the orbit of x0.
std::vector<Point> orbit(const MapSystem& map, const Point& x0, std::size_t n);

/// Uniform seeded draw followed by burn_in steps (map default when absent).
Point sample_invariant(const MapSystem& map, std::uint64_t seed,
                       std::optional<std::size_t> burn_in = std::nullopt);

/// Stateful generator of an approximately stationary orbit.
///
/// For the doubling map the state is a 64-bit binary fraction whose low bit is
/// refilled from the generator after every shift, so the orbit is the exact
/// orbit of a uniformly distributed real number. Floating-point orbits of the
/// intermittent maps fall into spurious periodic cycles after roughly 10^7 to
/// 10^8 steps, so callers keep each stream well below that length.
class OrbitStream {
 public:
  OrbitStream(const MapSystem& map, Rng& rng, std::optional<std::size_t> burn_in = std::nullopt);

  const Point& current() const { return point_; }
  void advance();
  /// Advances n steps.
  void skip(std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) advance();
  }

 private:
  void refill_bit();

  const MapSystem* map_;
  Rng* rng_;
  Point point_;
  std::uint64_t bits_ = 0;
  std::uint64_t reservoir_ = 0;
  int reservoir_left_ = 0;
};

/// Recommended upper bound on the length of a single floating-point orbit.
inline constexpr std::size_t kMaxStreamLength = std::size_t{1} << 22;

}  // namespace homog
