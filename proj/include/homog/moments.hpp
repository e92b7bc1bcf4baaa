#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "homog/maps.hpp"
#include "homog/observables.hpp"
#include "homog/stats.hpp"

namespace homog {

struct MomentScanMc {
  std::size_t orbits = 100'000;
  /// Consecutive windows cut from one stationary stream; each window is one orbit.
  std::size_t windows_per_stream = 100;
  std::optional<std::size_t> burn_in;
  std::uint64_t seed = 1;
};

struct MomentScanRow {
  std::int64_t n = 0;
  /// ||S_v(n)||_{p_birkhoff}
  MomentEstimate birkhoff;
  /// ||SS_{v,w}(n)||_{p_iterated}
  MomentEstimate iterated;
  /// Mean of SS_{v,w}(n) / n.
  double iterated_mean_per_n = 0.0;
  double iterated_mean_se = 0.0;
};

/// L^p norms of S_v(n) and SS_{v,w}(n) for every n in ns from one pass over
/// each orbit window.
std::vector<MomentScanRow> moment_scan(const MapSystem& map, const HolderObservable& v,
                                       const HolderObservable& w, std::span<const std::int64_t> ns,
                                       double p_birkhoff, double p_iterated,
                                       const MomentScanMc& mc);

}  // namespace homog
