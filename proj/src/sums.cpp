#include "homog/sums.hpp"

#include <sstream>
#include <stdexcept>

namespace homog {
namespace {

void require_window(std::int64_t a, std::int64_t b) {
  if (a < 0 || b < a) {
    std::ostringstream msg;
    msg << "invalid window [" << a << ", " << b << ")";
    throw std::invalid_argument(msg.str());
  }
}

Point advance_to(const MapSystem& map, Point x, std::int64_t steps) {
  for (std::int64_t i = 0; i < steps; ++i) x = map.step(x);
  return x;
}

}  // namespace

SegmentSums accumulate_values(std::span<const double> v, std::span<const double> w,
                              std::int64_t begin) {
  if (v.size() != w.size()) throw std::invalid_argument("accumulate_values: length mismatch");
  const auto len = static_cast<std::int64_t>(v.size());
  SumAccumulator acc(len > kCompensatedWindow);
  for (std::size_t i = 0; i < v.size(); ++i) acc.push(v[i], w[i]);
  return {begin, begin + len, acc.s_v(), acc.s_w(), acc.ss_vw()};
}

double birkhoff_sum(const MapSystem& map, const HolderObservable& v, const Point& x0,
                    std::int64_t a, std::int64_t b) {
  require_window(a, b);
  Point x = advance_to(map, x0, a);
  const bool compensated = b - a > kCompensatedWindow;
  NeumaierSum comp;
  double plain = 0.0;
  for (std::int64_t i = a; i < b; ++i) {
    if (compensated) {
      comp.add(v(x));
    } else {
      plain += v(x);
    }
    if (i + 1 < b) x = map.step(x);
  }
  return compensated ? comp.value() : plain;
}

SegmentSums iterated_sum_stream(const MapSystem& map, const HolderObservable& v,
                                const HolderObservable& w, const Point& x0, std::int64_t a,
                                std::int64_t b) {
  require_window(a, b);
  Point x = advance_to(map, x0, a);
  SumAccumulator acc(b - a > kCompensatedWindow);
  for (std::int64_t i = a; i < b; ++i) {
    acc.push(v(x), w(x));
    if (i + 1 < b) x = map.step(x);
  }
  return {a, b, acc.s_v(), acc.s_w(), acc.ss_vw()};
}

double iterated_sum_bruteforce(const MapSystem& map, const HolderObservable& v,
                               const HolderObservable& w, const Point& x0, std::int64_t a,
                               std::int64_t b) {
  require_window(a, b);
  if (b - a > kBruteForceMaxWindow) {
    throw std::invalid_argument("iterated_sum_bruteforce: window longer than 1e5");
  }
  std::vector<double> vs;
  std::vector<double> ws;
  Point x = advance_to(map, x0, a);
  for (std::int64_t i = a; i < b; ++i) {
    vs.push_back(v(x));
    ws.push_back(w(x));
    if (i + 1 < b) x = map.step(x);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    double inner = 0.0;
    for (std::size_t j = i + 1; j < ws.size(); ++j) inner += ws[j];
    total += vs[i] * inner;
  }
  return total;
}

SegmentSums chen_recombine(std::span<const SegmentSums> segments) {
  if (segments.empty()) throw std::invalid_argument("chen_recombine: no segments");
  SegmentSums out{segments.front().begin, segments.front().begin, 0.0, 0.0, 0.0};
  for (const SegmentSums& seg : segments) {
    if (seg.begin != out.end || seg.end < seg.begin) {
      std::ostringstream msg;
      msg << "chen_recombine: segment [" << seg.begin << ", " << seg.end
          << ") does not continue at " << out.end;
      throw std::invalid_argument(msg.str());
    }
    // SS over the union gains every pair with i in an earlier segment, j in this one.
    out.ss_vw += seg.ss_vw + out.s_v * seg.s_w;
    out.s_v += seg.s_v;
    out.s_w += seg.s_w;
    out.end = seg.end;
  }
  return out;
}

BlockScheme block_partition(std::int64_t n, std::int64_t k) {
  if (k < 1 || n < 2 * k) {
    std::ostringstream msg;
    msg << "block_partition requires n >= 2k >= 2 (n=" << n << ", k=" << k << ")";
    throw std::invalid_argument(msg.str());
  }
  BlockScheme s;
  s.n_ = n;
  s.k_ = k;
  s.a_.resize(static_cast<std::size_t>(2 * k + 1));
  for (std::int64_t i = 0; i <= 2 * k; ++i) s.a_[static_cast<std::size_t>(i)] = i * n / (2 * k);
  return s;
}

}  // namespace homog
