#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homog/maps.hpp"

namespace homog::acceptance {

/// Closed interval [low, high].
struct Band {
  double low = 0.0;
  double high = 0.0;
  constexpr bool contains(double x) const { return x >= low && x <= high; }
};

// Exact properties.
inline constexpr std::size_t kChenInstances = 1000;
inline constexpr double kChenRelTol = 1e-9;
inline constexpr std::size_t kStreamInstances = 1000;
inline constexpr std::int64_t kStreamMaxWindow = 10'000;
inline constexpr double kStreamRelTol = 1e-9;
inline constexpr std::int64_t kPartitionMaxN = 10'000;
inline constexpr std::int64_t kPartitionMaxK = 64;
inline constexpr std::size_t kLipschitzPairs = 100'000;
inline constexpr std::size_t kTailDraws = 10'000'000;
inline constexpr double kTailSigmas = 3.0;

// Tower.
inline constexpr double kTowerTheta = 0.5;
inline constexpr std::size_t kTowerTrials = 1'000'000;
inline constexpr double kTowerSlopeTol = 0.2;

// Correlations and moments.
inline constexpr Band kLsvCorrelationSlope{-1.8, -1.2};
inline constexpr Band kDoublingCorrelationRatio{0.45, 0.55};
inline constexpr Band kLsvBirkhoffExponent{0.45, 0.60};
inline constexpr Band kDoublingBirkhoffExponent{0.48, 0.53};
inline constexpr Band kIteratedExponent{0.90, 1.10};
inline constexpr std::size_t kMomentOrbits = 100'000;

// Functional correlation bound and coupling.
inline constexpr double kFcbSlopeMax = -1.2;
inline constexpr double kNoiseFloorMultiple = 2.0;
inline constexpr std::int64_t kDoublingWeakdepHorizon = 60;

// Homogenisation.
inline constexpr std::int64_t kDoublingKsN = std::int64_t{1} << 14;
inline constexpr double kDoublingKsMax = 0.05;
inline constexpr std::size_t kHomogenisationPaths = 100'000;
inline constexpr Band kGreenKuboDoubling{0.24, 0.26};

struct Verdict {
  bool passed = false;
  std::string detail;
};

inline Band birkhoff_band(MapKind kind) {
  return kind == MapKind::Doubling ? kDoublingBirkhoffExponent : kLsvBirkhoffExponent;
}

inline Band tower_band(double beta) {
  return {-(beta - 1.0) - kTowerSlopeTol, -(beta - 1.0) + kTowerSlopeTol};
}

/// Leading rows (in order) whose value exceeds kNoiseFloorMultiple standard errors.
inline std::size_t above_noise_prefix(std::span<const double> values, std::span<const double> std_errors) {
  std::size_t i = 0;
  while (i < values.size() && values[i] > kNoiseFloorMultiple * std_errors[i]) ++i;
  return i;
}

/// Coupling verdict: the deltas above the noise floor do not increase beyond
/// their combined noise and the scan reaches the floor, by `max_gap` if given.
inline Verdict coupling_verdict(std::span<const std::int64_t> gaps, std::span<const double> deltas,
                                std::span<const double> std_errors,
                                std::optional<std::int64_t> max_gap) {
  const std::size_t floor_at = above_noise_prefix(deltas, std_errors);
  bool decreasing = true;
  for (std::size_t i = 1; i < floor_at; ++i) {
    const double slack = kNoiseFloorMultiple * std::hypot(std_errors[i], std_errors[i - 1]);
    if (deltas[i] > deltas[i - 1] + slack) decreasing = false;
  }
  Verdict v;
  if (floor_at == gaps.size()) {
    v.detail = "delta stays above the noise floor over the tested gaps";
    return v;
  }
  const std::int64_t horizon = gaps[floor_at];
  v.passed = decreasing && (!max_gap || horizon <= *max_gap);
  v.detail = "noise floor reached at gap " + std::to_string(horizon) +
             (decreasing ? "" : "; delta increased before the floor");
  return v;
}

}  // namespace homog::acceptance
