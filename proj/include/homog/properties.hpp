#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace homog {

/// Outcome of one exact property sweep.
struct PropertyResult {
  std::string name;
  bool passed = false;
  std::size_t instances = 0;
  std::size_t failures = 0;
  double max_error = 0.0;
  double seconds = 0.0;
  std::string detail;
};

/// Randomized (map, observable, partition) instances: Chen recombination of
/// streamed segments against the double-loop sum of the whole window.
PropertyResult chen_property(std::size_t instances, std::uint64_t seed);

/// Streaming iterated sums against the double loop on windows up to max_window.
PropertyResult streaming_property(std::size_t instances, std::int64_t max_window, std::uint64_t seed);

/// Spacing and gap bounds of every block scheme with n <= max_n, k <= max_k.
PropertyResult partition_property(std::int64_t max_n, std::int64_t max_k);

/// Sup and difference-quotient bounds of PowerOfSum functionals.
PropertyResult lipschitz_property(std::size_t pairs, std::uint64_t seed);

/// Return-count additivity, the phi = 1 identity and the Pareto tail of
/// sample_return_time at n = 1, 2, 4, 8, 16.
PropertyResult tower_property(std::size_t tail_draws, std::uint64_t seed);

/// All of the above at their acceptance sizes.
std::vector<PropertyResult> run_property_suite(std::uint64_t seed);

}  // namespace homog
