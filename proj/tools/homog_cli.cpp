#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "homog/experiments.hpp"

namespace {

using nlohmann::json;

struct Flags {
  std::optional<std::string> config, map, n_list, n_pow, out, v, w, functional, drift, reference;
  std::optional<double> alpha, beta, theta, gamma, p, xi;
  std::optional<std::int64_t> k, trials, seed, threads, max_lag;
  bool check = false;
};

void add_flags(CLI::App& sub, Flags& f) {
  sub.add_option("--config", f.config, "JSON config file; flags override its keys");
  sub.add_option("--map", f.map, "doubling, lsv or baker");
  sub.add_option("--alpha", f.alpha, "LSV/Baker parameter in (0,1)");
  sub.add_option("--beta", f.beta, "tower tail exponent (> 1)");
  sub.add_option("--theta", f.theta, "tower separation base in (0,1]");
  sub.add_option("--gamma", f.gamma, "moment exponent (>= 1)");
  sub.add_option("--p", f.p, "PowerOfSum exponent for weakdep");
  sub.add_option("--n-list", f.n_list, "comma-separated n values");
  sub.add_option("--n-pow", f.n_pow, "lo:hi for n = 2^lo..2^hi");
  sub.add_option("--k", f.k, "number of blocks");
  sub.add_option("--trials", f.trials, "Monte Carlo size (orbits, trials, pairs or paths)");
  sub.add_option("--seed", f.seed, "master seed (required)");
  sub.add_option("--threads", f.threads, "worker threads (0: machine parallelism)");
  sub.add_option("--out", f.out, "output directory");
  sub.add_option("--v", f.v, "observable v: cos, sin, x, y");
  sub.add_option("--w", f.w, "observable w: cos, sin, x, y");
  sub.add_option("--functional", f.functional, "weakdep functional: tanh or power");
  sub.add_option("--drift", f.drift, "fastslow drift: zero or ou");
  sub.add_option("--xi", f.xi, "fastslow initial value");
  sub.add_option("--reference", f.reference, "fastslow reference: auto, exact or euler");
  sub.add_option("--max-lag", f.max_lag, "Green-Kubo truncation lag");
  sub.add_flag("--check", f.check, "exit 2 when the acceptance threshold fails");
}

template <class T>
void put(json& j, const char* key, const std::optional<T>& value) {
  if (value) j[key] = *value;
}

json merge(const std::string& experiment, const Flags& f) {
  json j = json::object();
  if (f.config) {
    std::ifstream in(*f.config);
    if (!in) throw homog::ConfigError("config file '" + *f.config + "' not found");
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw homog::ConfigError("config file '" + *f.config + "': " + e.what());
    }
    if (!j.is_object()) throw homog::ConfigError("config file '" + *f.config + "' must hold a JSON object");
    if (j.contains("experiment") && j["experiment"] != experiment) {
      throw homog::ConfigError("key 'experiment': config file names '" + j["experiment"].dump() +
                               "' but the subcommand is '" + experiment + "'");
    }
  }
  j["experiment"] = experiment;
  put(j, "map", f.map);
  put(j, "alpha", f.alpha);
  put(j, "beta", f.beta);
  put(j, "theta", f.theta);
  put(j, "gamma", f.gamma);
  put(j, "p", f.p);
  if (f.n_list) {
    j.erase("n_pow");
    j["n_list"] = *f.n_list;
  }
  if (f.n_pow) {
    j.erase("n_list");
    j["n_pow"] = *f.n_pow;
  }
  put(j, "k", f.k);
  put(j, "trials", f.trials);
  put(j, "seed", f.seed);
  put(j, "threads", f.threads);
  put(j, "out", f.out);
  put(j, "v", f.v);
  put(j, "w", f.w);
  put(j, "functional", f.functional);
  put(j, "drift", f.drift);
  put(j, "xi", f.xi);
  put(j, "reference", f.reference);
  put(j, "max_lag", f.max_lag);
  if (f.check) j["check"] = true;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo experiments for iterated moments and homogenisation of nonuniformly expanding maps"};
  app.set_version_flag("--version", homog::kSoftwareVersion);
  app.require_subcommand(1);
  Flags flags;
  const char* names[] = {"moments", "iterated-moments", "correlation", "tower-psi",
                         "weakdep", "fcb",              "fastslow",    "selftest"};
  for (const char* name : names) add_flags(*app.add_subcommand(name), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const std::string experiment = app.get_subcommands().front()->get_name();
  try {
    const homog::ExperimentConfig config = homog::config_from_json(merge(experiment, flags));
    const homog::ExperimentResult result = homog::run_experiment(config);
    homog::write_outputs(config, result);
    if (result.verdict) {
      std::cout << experiment << ": " << (result.verdict->passed ? "PASS" : "FAIL") << " ("
                << result.verdict->detail << ")\n";
    }
    std::cout << "wrote " << config.out << "/result.csv, result.json, summary.txt\n";
    return homog::exit_code(config, result);
  } catch (const homog::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
