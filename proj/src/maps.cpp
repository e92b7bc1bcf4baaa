#include "homog/maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace homog {
namespace {

void require_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream msg;
    msg << what << ": argument " << x << " outside [0,1]";
    throw std::domain_error(msg.str());
  }
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    std::ostringstream msg;
    msg << "alpha must lie in (0,1), got " << alpha;
    throw std::domain_error(msg.str());
  }
}

double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

// g(x) = x(1 + (2x)^alpha); writing 2^alpha x^alpha as (2x)^alpha makes g(1/2) = 1 exact.
inline double left_branch(double x, double alpha) {
  return x * (1.0 + std::exp(alpha * std::log(2.0 * x)));
}

inline double left_branch_derivative(double y, double alpha) {
  return 1.0 + (1.0 + alpha) * std::exp(alpha * std::log(2.0 * y));
}

inline double lsv_unchecked(double x, double alpha) {
  return x <= 0.5 ? left_branch(x, alpha) : 2.0 * x - 1.0;
}

inline double doubling_unchecked(double x) { return x < 0.5 ? 2.0 * x : 2.0 * x - 1.0; }

constexpr double kTwoPowMinus53 = 1.0 / 9007199254740992.0;

}  // namespace

std::string to_string(MapKind kind) {
  switch (kind) {
    case MapKind::Doubling: return "doubling";
    case MapKind::Lsv: return "lsv";
    case MapKind::Baker: return "baker";
  }
  return "unknown";
}

MapKind parse_map_kind(const std::string& name) {
  if (name == "doubling") return MapKind::Doubling;
  if (name == "lsv") return MapKind::Lsv;
  if (name == "baker") return MapKind::Baker;
  throw std::invalid_argument("unknown map '" + name + "' (expected doubling|lsv|baker)");
}

double lsv_left_branch(double x, double alpha) {
  require_alpha(alpha);
  if (!(x >= 0.0 && x <= 0.5)) throw std::domain_error("g: argument outside [0,1/2]");
  return left_branch(x, alpha);
}

double lsv_step(double x, double alpha) {
  require_unit(x, "lsv_step");
  require_alpha(alpha);
  return clamp_unit(lsv_unchecked(x, alpha));
}

double g_inverse(double u, double alpha, double tol, int max_iter) {
  require_unit(u, "g_inverse");
  require_alpha(alpha);
  if (u == 0.0) return 0.0;
  if (u == 1.0) return 0.5;

  double lo = 0.0;
  double hi = 0.5;
  int iter = 0;
  while (hi - lo > tol) {
    if (++iter > max_iter) {
      const double mid = 0.5 * (lo + hi);
      std::ostringstream msg;
      msg << "g_inverse did not converge after " << max_iter
          << " bisection steps; residual " << std::abs(left_branch(mid, alpha) - u);
      throw std::runtime_error(msg.str());
    }
    const double mid = 0.5 * (lo + hi);
    if (left_branch(mid, alpha) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double y = 0.5 * (lo + hi);
  for (int k = 0; k < 2; ++k) {
    if (y <= 0.0) break;
    y = std::clamp(y - (left_branch(y, alpha) - u) / left_branch_derivative(y, alpha), lo, hi);
  }
  const double residual = std::abs(left_branch(y, alpha) - u);
  if (residual > tol) {
    std::ostringstream msg;
    msg << "g_inverse residual " << residual << " exceeds tolerance " << tol;
    throw std::runtime_error(msg.str());
  }
  return y;
}

Point baker_step(const Point& p, double alpha, double tol) {
  require_unit(p[0], "baker_step");
  require_unit(p[1], "baker_step");
  require_alpha(alpha);
  const double x1 = clamp_unit(lsv_unchecked(p[0], alpha));
  const double x2 = p[0] <= 0.5 ? g_inverse(p[1], alpha, tol) : 0.5 * (p[1] + 1.0);
  return Point(x1, clamp_unit(x2));
}

double doubling_step(double x) {
  require_unit(x, "doubling_step");
  return doubling_unchecked(x);
}

MapSystem MapSystem::doubling() { return MapSystem(MapKind::Doubling, 0.0); }

MapSystem MapSystem::lsv(double alpha) {
  require_alpha(alpha);
  return MapSystem(MapKind::Lsv, alpha);
}

MapSystem MapSystem::baker(double alpha) {
  require_alpha(alpha);
  return MapSystem(MapKind::Baker, alpha);
}

MapSystem MapSystem::make(MapKind kind, double alpha) {
  switch (kind) {
    case MapKind::Doubling: return doubling();
    case MapKind::Lsv: return lsv(alpha);
    case MapKind::Baker: return baker(alpha);
  }
  throw std::invalid_argument("unknown map kind");
}

double MapSystem::beta() const {
  return kind_ == MapKind::Doubling ? std::numeric_limits<double>::infinity() : 1.0 / alpha_;
}

std::string MapSystem::name() const {
  if (kind_ == MapKind::Doubling) return "doubling";
  std::ostringstream s;
  s << to_string(kind_) << "(alpha=" << alpha_ << ")";
  return s.str();
}

double MapSystem::step_x(double x) const {
  return kind_ == MapKind::Doubling ? doubling_unchecked(x) : clamp_unit(lsv_unchecked(x, alpha_));
}

Point MapSystem::step(const Point& p) const {
  switch (kind_) {
    case MapKind::Doubling: return Point(doubling_unchecked(p[0]));
    case MapKind::Lsv: return Point(clamp_unit(lsv_unchecked(p[0], alpha_)));
    case MapKind::Baker: return baker_step(p, alpha_);
  }
  return p;
}

Point MapSystem::uniform_point(Rng& rng) const {
  if (state_dim() == 2) {
    const double a = uniform01(rng);
    return Point(a, uniform01(rng));
  }
  return Point(uniform01(rng));
}

std::vector<Point> orbit(const MapSystem& map, const Point& x0, std::size_t n) {
  for (int i = 0; i < x0.dim(); ++i) require_unit(x0[i], "orbit");
  std::vector<Point> out;
  out.reserve(n + 1);
  out.push_back(x0);
  for (std::size_t i = 0; i < n; ++i) out.push_back(map.step(out.back()));
  return out;
}

Point sample_invariant(const MapSystem& map, std::uint64_t seed, std::optional<std::size_t> burn_in) {
  Rng rng = make_rng(seed);
  OrbitStream stream(map, rng, burn_in);
  return stream.current();
}

OrbitStream::OrbitStream(const MapSystem& map, Rng& rng, std::optional<std::size_t> burn_in)
    : map_(&map), rng_(&rng) {
  if (map.kind() == MapKind::Doubling) {
    bits_ = rng();
    point_ = Point(static_cast<double>(bits_ >> 11) * kTwoPowMinus53);
  } else {
    point_ = map.uniform_point(rng);
  }
  skip(burn_in.value_or(map.default_burn_in()));
}

void OrbitStream::refill_bit() {
  if (reservoir_left_ == 0) {
    reservoir_ = (*rng_)();
    reservoir_left_ = 64;
  }
  bits_ = (bits_ << 1) | (reservoir_ & 1u);
  reservoir_ >>= 1;
  --reservoir_left_;
}

void OrbitStream::advance() {
  switch (map_->kind()) {
    case MapKind::Doubling:
      refill_bit();
      point_ = Point(static_cast<double>(bits_ >> 11) * kTwoPowMinus53);
      break;
    case MapKind::Lsv:
      point_ = Point(map_->step_x(point_[0]));
      break;
    case MapKind::Baker:
      point_ = map_->step(point_);
      break;
  }
}

}  // namespace homog
