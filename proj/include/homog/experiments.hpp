#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "homog/acceptance.hpp"
#include "homog/maps.hpp"
#include "homog/observables.hpp"

namespace homog {

enum class ExperimentKind { Moments, IteratedMoments, Correlation, TowerPsi, Weakdep, Fcb, Fastslow, Selftest };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment(const std::string& name);

/// Raised for malformed or out-of-range configuration; the message names the key.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Selftest;
  MapKind map = MapKind::Lsv;
  double alpha = 0.4;
  /// Tower tail exponent.
  double beta = 2.5;
  double theta = 0.5;
  /// Moment exponent: Birkhoff sums use p = 2 gamma, iterated sums p = gamma.
  double gamma = 1.5;
  /// PowerOfSum exponent for weakdep.
  double p = 2.0;
  std::vector<std::int64_t> n_list;
  std::int64_t k = 2;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out = "out";
  bool check = false;
  /// Observable ids: cos, sin, x, y (Baker only); w defaults to v.
  std::string v = "cos";
  std::string w = "cos";
  /// weakdep functional: tanh or power.
  std::string functional = "tanh";
  /// fastslow: drift zero or ou, initial value, reference auto/exact/euler, Green–Kubo lag.
  std::string drift = "zero";
  double xi = 0.0;
  std::string reference = "auto";
  std::int64_t max_lag = 0;
};

/// Builds a validated config from a JSON object whose keys mirror the CLI
/// flags with underscores. Unknown keys, a missing seed and out-of-range
/// values raise ConfigError; unset parameters receive experiment defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const ExperimentConfig& config);

/// Parses "a,b,c" and "lo:hi" (powers of two 2^lo..2^hi).
std::vector<std::int64_t> parse_n_list(const std::string& text);
std::vector<std::int64_t> parse_n_pow(const std::string& text);

/// Observable by id, centered against the map's invariant measure.
HolderObservable make_observable(const std::string& id, const MapSystem& map, std::uint64_t seed);

using Cell = std::variant<double, std::string>;

struct ExperimentResult {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, double>> fits;
  std::vector<std::pair<std::string, std::string>> notes;
  /// Extra two-column sample file (fastslow): column names and rows.
  std::vector<std::string> sample_columns;
  std::vector<std::vector<double>> samples;
  /// Acceptance verdict when the experiment has one.
  std::optional<acceptance::Verdict> verdict;
  double wall_clock_seconds = 0.0;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes result.csv, result.json, summary.txt (and samples.csv when present) into config.out.
void write_outputs(const ExperimentConfig& config, const ExperimentResult& result);

/// 0 on success, 2 when the verdict failed and checking was requested.
int exit_code(const ExperimentConfig& config, const ExperimentResult& result);

/// "%.17g".
std::string format_double(double x);

inline constexpr const char* kSoftwareVersion = "0.1.0";

}  // namespace homog
