#include "homog/moments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "homog/parallel.hpp"
#include "homog/sums.hpp"

namespace homog {

std::vector<MomentScanRow> moment_scan(const MapSystem& map, const HolderObservable& v,
                                       const HolderObservable& w, std::span<const std::int64_t> ns,
                                       double p_birkhoff, double p_iterated,
                                       const MomentScanMc& mc) {
  if (ns.empty()) return {};
  if (mc.orbits < 100) throw std::invalid_argument("moment_scan: orbits must be >= 100");
  if (mc.windows_per_stream < 1) throw std::invalid_argument("moment_scan: windows_per_stream must be >= 1");
  std::vector<std::int64_t> sorted(ns.begin(), ns.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 1) throw std::invalid_argument("moment_scan: n must be >= 1");
  const std::int64_t n_max = sorted.back();
  const std::size_t windows = mc.windows_per_stream;
  if (static_cast<std::size_t>(n_max) * windows > kMaxStreamLength) {
    throw std::invalid_argument("moment_scan: windows_per_stream * max n exceeds the stream length limit");
  }
  const std::size_t nn = sorted.size();
  const std::size_t streams = (mc.orbits + windows - 1) / windows;

  struct Block {
    std::vector<double> s;   // orbit-major, nn per orbit
    std::vector<double> ss;
  };
  const std::size_t chunks = std::min<std::size_t>(streams, 256);
  auto parts = map_chunks<Block>(chunks, [&](std::size_t c) {
    const IndexRange r = split_range(streams, chunks, c);
    Block out;
    for (std::size_t stream = r.begin; stream < r.end; ++stream) {
      Rng rng = make_rng(mc.seed, stream);
      OrbitStream orbit(map, rng, mc.burn_in);
      const std::size_t used = std::min(windows, mc.orbits - stream * windows);
      for (std::size_t wdx = 0; wdx < used; ++wdx) {
        SumAccumulator acc;
        std::size_t next = 0;
        for (std::int64_t t = 1; t <= n_max; ++t) {
          const Point& x = orbit.current();
          acc.push(v(x), w(x));
          orbit.advance();
          if (next < nn && t == sorted[next]) {
            for (; next < nn && sorted[next] == t; ++next) {
              out.s.push_back(acc.s_v());
              out.ss.push_back(acc.ss_vw());
            }
          }
        }
      }
    }
    return out;
  });

  std::vector<MomentScanRow> rows(nn);
  std::vector<double> s_col, ss_col, mean_col;
  for (std::size_t i = 0; i < nn; ++i) {
    s_col.clear();
    ss_col.clear();
    mean_col.clear();
    for (const Block& b : parts) {
      for (std::size_t t = i; t < b.s.size(); t += nn) {
        s_col.push_back(b.s[t]);
        ss_col.push_back(b.ss[t]);
        mean_col.push_back(b.ss[t] / static_cast<double>(sorted[i]));
      }
    }
    MomentScanRow& row = rows[i];
    row.n = sorted[i];
    row.birkhoff = lp_norm_from_samples(s_col, p_birkhoff, mc.seed + 2 * i, row.n);
    row.iterated = lp_norm_from_samples(ss_col, p_iterated, mc.seed + 2 * i + 1, row.n);
    row.iterated_mean_per_n = mean_of(mean_col);
    row.iterated_mean_se = batched_standard_error(mean_col);
  }
  return rows;
}

}  // namespace homog
