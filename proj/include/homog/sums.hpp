#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "homog/maps.hpp"
#include "homog/observables.hpp"
#include "homog/summation.hpp"

namespace homog {

/// Birkhoff and iterated sums of a window [begin, end) of an orbit.
struct SegmentSums {
  std::int64_t begin = 0;
  std::int64_t end = 0;
  double s_v = 0.0;
  double s_w = 0.0;
  /// Sum over begin <= i < j < end of v_i * w_j.
  double ss_vw = 0.0;
};

/// Streaming accumulator for (S_v, S_w, SS_vw) in O(1) memory.
///
/// Pushing (v_m, w_m) first adds s_v * w_m to ss_vw and only then adds v_m to
/// s_v; this order is what makes ss_vw the sum over strictly ordered pairs.
class SumAccumulator {
 public:
  explicit SumAccumulator(bool compensated = false) : compensated_(compensated) {}

  void push(double v, double w) {
    if (compensated_) {
      ss_c_.add(s_v() * w);
      sv_c_.add(v);
      sw_c_.add(w);
    } else {
      ss_ += s_v_ * w;
      s_v_ += v;
      s_w_ += w;
    }
    ++count_;
  }

  double s_v() const { return compensated_ ? sv_c_.value() : s_v_; }
  double s_w() const { return compensated_ ? sw_c_.value() : s_w_; }
  double ss_vw() const { return compensated_ ? ss_c_.value() : ss_; }
  std::int64_t count() const { return count_; }

 private:
  bool compensated_;
  double s_v_ = 0.0;
  double s_w_ = 0.0;
  double ss_ = 0.0;
  NeumaierSum sv_c_, sw_c_, ss_c_;
  std::int64_t count_ = 0;
};

/// Windows longer than this use compensated summation.
inline constexpr std::int64_t kCompensatedWindow = 1'000'000;

/// Sums of value sequences v[0..m), w[0..m) treated as the window [begin, begin+m).
SegmentSums accumulate_values(std::span<const double> v, std::span<const double> w,
                              std::int64_t begin = 0);

/// S_v(a,b) = sum_{a<=i<b} v(T^i x0).
double birkhoff_sum(const MapSystem& map, const HolderObservable& v, const Point& x0,
                    std::int64_t a, std::int64_t b);

/// Single orbit pass returning S_v(a,b), S_w(a,b) and SS_vw(a,b).
SegmentSums iterated_sum_stream(const MapSystem& map, const HolderObservable& v,
                                const HolderObservable& w, const Point& x0, std::int64_t a,
                                std::int64_t b);

/// Double loop over pairs; reference for iterated_sum_stream. Rejects windows longer than 1e5.
double iterated_sum_bruteforce(const MapSystem& map, const HolderObservable& v,
                               const HolderObservable& w, const Point& x0, std::int64_t a,
                               std::int64_t b);

inline constexpr std::int64_t kBruteForceMaxWindow = 100'000;

/// Combines sums over contiguous windows a_0 <= a_1 <= ... <= a_l into the sums
/// over [a_0, a_l). Throws std::invalid_argument for empty or non-contiguous input.
SegmentSums chen_recombine(std::span<const SegmentSums> segments);

/// Partition a_i = floor(i n / 2k), 0 <= i <= 2k, into k odd blocks
/// [a_{2i}, a_{2i+1}) separated by gaps [a_{2i+1}, a_{2i+2}).
class BlockScheme {
 public:
  std::int64_t n() const { return n_; }
  std::int64_t k() const { return k_; }
  const std::vector<std::int64_t>& a() const { return a_; }

  /// l_i = a_{2i}.
  std::int64_t lower(std::int64_t i) const { return a_[static_cast<std::size_t>(2 * i)]; }
  /// u_i = a_{2i+1} - 1.
  std::int64_t upper(std::int64_t i) const { return a_[static_cast<std::size_t>(2 * i + 1)] - 1; }
  std::int64_t block_length(std::int64_t i) const { return upper(i) - lower(i) + 1; }
  /// l_{r+1} - u_r for 0 <= r <= k-2.
  std::int64_t gap(std::int64_t r) const { return lower(r + 1) - upper(r); }

  friend BlockScheme block_partition(std::int64_t n, std::int64_t k);

 private:
  std::int64_t n_ = 0;
  std::int64_t k_ = 0;
  std::vector<std::int64_t> a_;
};

/// Requires n >= 2k >= 2.
BlockScheme block_partition(std::int64_t n, std::int64_t k);

}  // namespace homog
