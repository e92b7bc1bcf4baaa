#include "homog/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "homog/parallel.hpp"
#include "homog/summation.hpp"

namespace homog {

HolderObservable HolderObservable::coordinate(int coord) {
  if (coord < 0 || coord > 1) throw std::invalid_argument("coordinate index must be 0 or 1");
  HolderObservable v(ObservableKind::Coordinate, coord, 1.0);
  return v;
}

HolderObservable HolderObservable::cosine(double freq, int coord, double phase) {
  if (coord < 0 || coord > 1) throw std::invalid_argument("coordinate index must be 0 or 1");
  HolderObservable v(ObservableKind::Cosine, coord, 1.0);
  v.a_ = freq;
  v.b_ = phase;
  return v;
}

HolderObservable HolderObservable::affine(double slope, double intercept, int coord) {
  if (coord < 0 || coord > 1) throw std::invalid_argument("coordinate index must be 0 or 1");
  HolderObservable v(ObservableKind::Affine, coord, 1.0);
  v.a_ = slope;
  v.b_ = intercept;
  return v;
}

HolderObservable HolderObservable::constant(double c) {
  HolderObservable v(ObservableKind::Constant, 0, 1.0);
  v.a_ = c;
  return v;
}

HolderObservable HolderObservable::tabulated(std::vector<double> values, int coord) {
  if (values.size() < 2) throw std::invalid_argument("tabulated observable needs >= 2 values");
  HolderObservable v(ObservableKind::Tabulated, coord, 1.0);
  v.table_ = std::move(values);
  return v;
}

double HolderObservable::raw(double x) const {
  switch (kind_) {
    case ObservableKind::Coordinate: return x;
    case ObservableKind::Cosine: return std::cos(2.0 * std::numbers::pi * a_ * x + b_);
    case ObservableKind::Affine: return a_ * x + b_;
    case ObservableKind::Constant: return a_;
    case ObservableKind::Tabulated: {
      const double scaled = std::clamp(x, 0.0, 1.0) * static_cast<double>(table_.size() - 1);
      const std::size_t i = std::min(static_cast<std::size_t>(scaled), table_.size() - 2);
      const double t = scaled - static_cast<double>(i);
      return (1.0 - t) * table_[i] + t * table_[i + 1];
    }
  }
  return 0.0;
}

std::string HolderObservable::describe() const {
  std::ostringstream s;
  switch (kind_) {
    case ObservableKind::Coordinate: s << "x" << coord_; break;
    case ObservableKind::Cosine: s << "cos(2pi*" << a_ << "*x" << coord_ << "+" << b_ << ")"; break;
    case ObservableKind::Affine: s << a_ << "*x" << coord_ << "+" << b_; break;
    case ObservableKind::Constant: s << a_; break;
    case ObservableKind::Tabulated: s << "table[" << table_.size() << "](x" << coord_ << ")"; break;
  }
  if (mean_offset_ != 0.0) s << " - " << mean_offset_;
  return s.str();
}

HolderObservable HolderObservable::with_offset(double offset, double std_error, bool centered) const {
  HolderObservable v = *this;
  v.mean_offset_ = offset;
  v.centering_se_ = std_error;
  v.centered_ = centered;
  return v;
}

namespace {

struct ChunkMoments {
  double shift_sum = 0.0;  // sum of (orbit mean - shift)
  double shift_sq = 0.0;
  std::size_t orbits = 0;
};

}  // namespace

HolderObservable center(const HolderObservable& obs, const MapSystem& map,
                        const CenteringOptions& mc) {
  if (mc.samples < 1) throw std::invalid_argument("center: samples must be >= 1");
  if (obs.kind() == ObservableKind::Constant) {
    return obs.with_offset(obs.raw(0.0), 0.0, true);
  }
  const std::size_t orbit_len = std::max<std::size_t>(1, mc.orbit_len);
  const std::size_t orbits = std::max<std::size_t>(1, mc.samples / orbit_len);
  const std::size_t chunks = default_chunks(orbits);

  // Shift by a reference value so that constant samples average exactly.
  const double shift = [&] {
    Rng rng = make_rng(mc.seed, 0xC0FFEE);
    OrbitStream s(map, rng, mc.burn_in);
    return obs(s.current());
  }();

  auto parts = map_chunks<ChunkMoments>(chunks, [&](std::size_t c) {
    Rng rng = make_rng(mc.seed, c);
    ChunkMoments m;
    const IndexRange r = split_range(orbits, chunks, c);
    for (std::size_t o = r.begin; o < r.end; ++o) {
      OrbitStream s(map, rng, mc.burn_in);
      NeumaierSum acc;
      for (std::size_t t = 0; t < orbit_len; ++t) {
        acc.add(obs(s.current()) - shift);
        if (t + 1 < orbit_len) s.advance();
      }
      const double orbit_mean = acc.value() / static_cast<double>(orbit_len);
      m.shift_sum += orbit_mean;
      m.shift_sq += orbit_mean * orbit_mean;
      ++m.orbits;
    }
    return m;
  });

  NeumaierSum sum;
  NeumaierSum sq;
  for (const auto& p : parts) {
    sum.add(p.shift_sum);
    sq.add(p.shift_sq);
  }
  const double n = static_cast<double>(orbits);
  const double mean = sum.value() / n;
  const double var = orbits > 1 ? std::max(0.0, (sq.value() - n * mean * mean) / (n - 1.0)) : 0.0;
  const double se = std::sqrt(var / n);
  return obs.with_offset(obs.mean_offset() + shift + mean, se, true);
}

double holder_seminorm_estimate(const HolderObservable& obs, int dim, std::size_t pair_samples,
                                double eta, std::uint64_t seed) {
  if (pair_samples < 1) throw std::invalid_argument("holder_seminorm_estimate: pair_samples >= 1");
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in (0,1]");
  Rng rng = make_rng(seed);
  double best = 0.0;
  for (std::size_t i = 0; i < pair_samples; ++i) {
    Point x = dim == 2 ? Point(uniform01(rng), uniform01(rng)) : Point(uniform01(rng));
    Point y = dim == 2 ? Point(uniform01(rng), uniform01(rng)) : Point(uniform01(rng));
    double d = 0.0;
    for (int k = 0; k < dim; ++k) d = std::max(d, std::abs(x[k] - y[k]));
    if (d == 0.0) continue;
    best = std::max(best, std::abs(obs(x) - obs(y)) / std::pow(d, eta));
  }
  return best;
}

}  // namespace homog
