#include "homog/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "homog/fastslow.hpp"
#include "homog/moments.hpp"
#include "homog/parallel.hpp"
#include "homog/properties.hpp"
#include "homog/stats.hpp"
#include "homog/tower.hpp"
#include "homog/weakdep.hpp"

namespace homog {

namespace {

using nlohmann::json;

constexpr std::pair<ExperimentKind, const char*> kExperimentNames[] = {
    {ExperimentKind::Moments, "moments"},       {ExperimentKind::IteratedMoments, "iterated-moments"},
    {ExperimentKind::Correlation, "correlation"}, {ExperimentKind::TowerPsi, "tower-psi"},
    {ExperimentKind::Weakdep, "weakdep"},       {ExperimentKind::Fcb, "fcb"},
    {ExperimentKind::Fastslow, "fastslow"},     {ExperimentKind::Selftest, "selftest"},
};

const std::set<std::string> kKeys = {
    "experiment", "map",  "alpha", "beta",  "theta",      "gamma", "p",  "n_list",    "n_pow",
    "k",          "trials", "seed", "threads", "out",      "check", "v",  "w",         "functional",
    "drift",      "xi",   "reference", "max_lag",
};

template <class T>
T get(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + key + "': expected " +
                      (std::is_same_v<T, std::string> ? "a string"
                       : std::is_same_v<T, bool>      ? "a boolean"
                       : std::is_integral_v<T>        ? "an integer"
                                                      : "a number"));
  }
}

std::int64_t get_nonnegative(const json& j, const std::string& key) {
  if (!j.at(key).is_number_integer() || j.at(key).get<std::int64_t>() < 0) {
    throw ConfigError("key '" + key + "': expected a nonnegative integer");
  }
  return j.at(key).get<std::int64_t>();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

std::vector<std::int64_t> pow2_range(int lo, int hi) {
  std::vector<std::int64_t> out;
  for (int e = lo; e <= hi; ++e) out.push_back(std::int64_t{1} << e);
  return out;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Weighted log-log fit of the first `count` rows; nullopt with fewer than three.
std::optional<ScalingFit> fit_prefix(std::span<const std::int64_t> ns, std::span<const double> values,
                                     std::span<const double> ses, std::size_t count) {
  std::vector<std::pair<double, double>> pts;
  std::vector<double> vals, errs;
  for (std::size_t i = 0; i < count; ++i) {
    if (!(values[i] > 0.0)) continue;
    pts.emplace_back(static_cast<double>(ns[i]), values[i]);
    vals.push_back(values[i]);
    errs.push_back(ses[i]);
  }
  if (pts.size() < 3) return std::nullopt;
  return scaling_fit(pts, log_weights(vals, errs));
}

void add_fit(ExperimentResult& r, const std::optional<ScalingFit>& fit, std::size_t points) {
  if (!fit) {
    r.notes.emplace_back("fit", "fewer than three usable points");
    return;
  }
  r.fits.emplace_back("exponent", fit->exponent);
  r.fits.emplace_back("log_prefactor", fit->log_prefactor);
  r.fits.emplace_back("r_squared", fit->r_squared);
  r.fits.emplace_back("exponent_std_error", fit->exponent_std_error);
  r.fits.emplace_back("fit_points", static_cast<double>(points));
}

acceptance::Verdict band_verdict(const std::optional<ScalingFit>& fit, acceptance::Band band,
                                 const std::string& what) {
  acceptance::Verdict v;
  if (!fit) {
    v.detail = what + ": no fit";
    return v;
  }
  v.passed = band.contains(fit->exponent);
  std::ostringstream d;
  d << what << " " << fit->exponent << " in [" << band.low << ", " << band.high << "]";
  v.detail = d.str();
  return v;
}

ExperimentResult run_moments(const ExperimentConfig& c, bool iterated) {
  ExperimentResult r;
  const MapSystem map = MapSystem::make(c.map, c.alpha);
  const HolderObservable v = make_observable(c.v, map, c.seed);
  const HolderObservable w = make_observable(c.w, map, c.seed + 1);
  const std::size_t n_max = static_cast<std::size_t>(c.n_list.back());
  const std::size_t windows = std::clamp<std::size_t>(kMaxStreamLength / n_max, 1, 100);
  const auto rows = moment_scan(map, v, w, c.n_list, 2.0 * c.gamma, c.gamma,
                                {.orbits = c.trials, .windows_per_stream = windows, .seed = c.seed});
  r.columns = {"n", "value", "ci_low", "ci_high", "std_error", "trials"};
  if (iterated) {
    r.columns.insert(r.columns.end() - 1, "mean_per_n");
    r.columns.insert(r.columns.end() - 1, "mean_per_n_se");
  }
  std::vector<double> values, ses;
  for (const MomentScanRow& row : rows) {
    const MomentEstimate& m = iterated ? row.iterated : row.birkhoff;
    std::vector<Cell> cells{static_cast<double>(row.n), m.value, m.ci_low, m.ci_high, m.std_error};
    if (iterated) {
      cells.emplace_back(row.iterated_mean_per_n);
      cells.emplace_back(row.iterated_mean_se);
    }
    cells.emplace_back(static_cast<double>(m.trials));
    r.rows.push_back(std::move(cells));
    values.push_back(m.value);
    ses.push_back(m.std_error);
  }
  r.notes.emplace_back("p", format_double(iterated ? c.gamma : 2.0 * c.gamma));
  const auto fit = fit_prefix(c.n_list, values, ses, values.size());
  add_fit(r, fit, values.size());
  r.verdict = iterated ? band_verdict(fit, acceptance::kIteratedExponent, "iterated exponent")
                       : band_verdict(fit, acceptance::birkhoff_band(c.map), "Birkhoff exponent");
  return r;
}

ExperimentResult run_correlation(const ExperimentConfig& c) {
  ExperimentResult r;
  const MapSystem map = MapSystem::make(c.map, c.alpha);
  const HolderObservable v = make_observable(c.v, map, c.seed);
  const HolderObservable w = make_observable(c.w, map, c.seed + 1);
  const std::size_t orbit_len = std::max<std::size_t>(100'000, 4 * static_cast<std::size_t>(c.n_list.back()));
  const auto est = cross_correlation(map, v, w, c.n_list, {.orbits = c.trials, .orbit_len = orbit_len, .seed = c.seed});
  r.columns = {"n", "value", "signed", "ci_low", "ci_high", "std_error"};
  std::vector<double> values, ses;
  for (const CorrelationEstimate& e : est) {
    double lo = e.value >= 0.0 ? e.ci_low : -e.ci_high;
    double hi = e.value >= 0.0 ? e.ci_high : -e.ci_low;
    if (lo < 0.0) lo = 0.0;
    r.rows.push_back({static_cast<double>(e.lag), std::abs(e.value), e.value, lo, hi, e.std_error});
    values.push_back(std::abs(e.value));
    ses.push_back(e.std_error);
  }
  const std::size_t floor_at = acceptance::above_noise_prefix(values, ses);
  r.fits.emplace_back("noise_floor_index", static_cast<double>(floor_at));
  if (c.map == MapKind::Doubling) {
    std::vector<double> lags, logs;
    for (std::size_t i = 0; i < floor_at; ++i) {
      lags.push_back(static_cast<double>(c.n_list[i]));
      logs.push_back(std::log(values[i]));
    }
    const auto lw = log_weights(std::span(values).first(floor_at), std::span(ses).first(floor_at));
    acceptance::Verdict verdict;
    if (lags.size() >= 2) {
      const double ratio = std::exp(linear_fit(lags, logs, lw).slope);
      r.fits.emplace_back("ratio", ratio);
      verdict.passed = acceptance::kDoublingCorrelationRatio.contains(ratio);
      verdict.detail = "geometric ratio " + format_double(ratio);
    } else {
      verdict.detail = "fewer than two lags above the noise floor";
    }
    r.verdict = verdict;
  } else {
    const auto fit = fit_prefix(c.n_list, values, ses, floor_at);
    add_fit(r, fit, floor_at);
    r.verdict = band_verdict(fit, acceptance::kLsvCorrelationSlope, "correlation slope");
  }
  return r;
}

ExperimentResult run_tower(const ExperimentConfig& c) {
  ExperimentResult r;
  const TowerSpec spec{ReturnTimeLaw::pareto(c.beta), c.theta};
  const auto est = theta_psi_moments(spec, c.theta, c.n_list, {.trials = c.trials, .seed = c.seed});
  r.columns = {"n", "value", "ci_low", "ci_high", "std_error", "trials"};
  std::vector<double> values, ses;
  for (const MomentEstimate& m : est) {
    r.rows.push_back({static_cast<double>(m.n), m.value, m.ci_low, m.ci_high, m.std_error,
                      static_cast<double>(m.trials)});
    values.push_back(m.value);
    ses.push_back(m.std_error);
  }
  const auto fit = fit_prefix(c.n_list, values, ses, values.size());
  add_fit(r, fit, values.size());
  r.fits.emplace_back("target_exponent", -(c.beta - 1.0));
  r.verdict = band_verdict(fit, acceptance::tower_band(c.beta), "tower exponent");
  return r;
}

ExperimentResult run_weakdep(const ExperimentConfig& c) {
  ExperimentResult r;
  const MapSystem map = MapSystem::make(c.map, c.alpha);
  const HolderObservable v = make_observable(c.v, map, c.seed);
  const Functional f = c.functional == "power" ? Functional::power_of_sum(static_cast<int>(c.k), c.p, 1.0)
                                               : Functional::tanh_product(static_cast<int>(c.k));
  const auto rep = weakdep_gap_experiment(map, v, f, c.n_list, c.k, {.trials = c.trials, .seed = c.seed});
  r.columns = {"n", "gap", "value", "ci_low", "ci_high", "std_error", "mean_dynamic", "mean_independent",
               "below_noise"};
  std::vector<std::int64_t> gaps;
  std::vector<double> deltas, ses;
  for (const WeakdepRow& row : rep.rows) {
    r.rows.push_back({static_cast<double>(row.n), static_cast<double>(row.gap), row.delta, row.ci_low,
                      row.ci_high, row.std_error, row.mean_dynamic, row.mean_independent,
                      row.below_noise ? 1.0 : 0.0});
    gaps.push_back(row.gap);
    deltas.push_back(row.delta);
    ses.push_back(row.std_error);
  }
  if (rep.horizon) r.fits.emplace_back("horizon_gap", static_cast<double>(*rep.horizon));
  r.notes.emplace_back("functional", f.describe());
  r.verdict = acceptance::coupling_verdict(
      gaps, deltas, ses,
      c.map == MapKind::Doubling ? std::optional(acceptance::kDoublingWeakdepHorizon) : std::nullopt);
  return r;
}

ExperimentResult run_fcb(const ExperimentConfig& c) {
  ExperimentResult r;
  const MapSystem map = MapSystem::make(c.map, c.alpha);
  const HolderObservable v = make_observable(c.v, map, c.seed);
  const Functional g = Functional::product_of({v, v, v}, 1);
  const std::int64_t head[] = {0};
  const std::int64_t tail[] = {0, 1};
  const auto times = fcb_gap_times(head, tail, c.n_list);
  const auto est = fcb_functional_experiment(map, g, times, {.pairs = c.trials, .seed = c.seed});
  r.columns = {"n", "value", "ci_low", "ci_high", "std_error", "single", "split", "below_noise"};
  std::vector<double> deltas, ses;
  for (const FcbEstimate& e : est) {
    r.rows.push_back({static_cast<double>(e.gap), e.delta, e.ci_low, e.ci_high, e.std_error, e.single, e.split,
                      e.below_noise ? 1.0 : 0.0});
    deltas.push_back(e.delta);
    ses.push_back(e.std_error);
  }
  const std::size_t floor_at = acceptance::above_noise_prefix(deltas, ses);
  const auto fit = fit_prefix(c.n_list, deltas, ses, floor_at);
  add_fit(r, fit, floor_at);
  acceptance::Verdict verdict;
  if (fit) {
    verdict.passed = fit->exponent <= acceptance::kFcbSlopeMax;
    verdict.detail = "slope " + format_double(fit->exponent) + " over " + std::to_string(floor_at) +
                     " gaps above the noise floor";
  } else {
    verdict.detail = "fewer than three gaps above the noise floor";
  }
  r.verdict = verdict;
  return r;
}

ExperimentResult run_fastslow(const ExperimentConfig& c) {
  ExperimentResult r;
  const MapSystem map = MapSystem::make(c.map, c.alpha);
  FastSlowSpec spec;
  spec.a = c.drift == "ou" ? DriftFn::ornstein_uhlenbeck() : DriftFn::zero();
  spec.b = NoiseFn::additive();
  spec.v = make_observable(c.v, map, c.seed);
  spec.xi = c.xi;
  spec.fast_map = map;
  const GreenKuboEstimate gk = green_kubo_sigma(map, spec.v, c.max_lag, {.seed = c.seed + 7});
  const ReferenceKind ref = c.reference == "euler" ? ReferenceKind::EulerMaruyama
                            : c.reference == "exact" || c.map == MapKind::Doubling ? ReferenceKind::ExactGaussian
                                                                                     : ReferenceKind::EulerMaruyama;
  const auto rep = homogenisation_compare(spec, {gk.sigma2, 0.0}, c.n_list, ref,
                                          {.paths = c.trials, .reference_paths = c.trials, .seed = c.seed});
  r.columns = {"n", "ks", "ks_critical", "mean", "variance", "mean_diff", "var_diff", "discarded"};
  for (const HomogenisationRow& row : rep.rows) {
    r.rows.push_back({static_cast<double>(row.n), row.ks, row.ks_critical, row.mean, row.variance, row.mean_diff,
                      row.var_diff, static_cast<double>(row.discarded)});
  }
  r.fits.emplace_back("sigma2", gk.sigma2);
  r.fits.emplace_back("sigma2_std_error", gk.std_error);
  r.fits.emplace_back("sigma2_direct", gk.direct);
  r.fits.emplace_back("max_lag", static_cast<double>(gk.max_lag));
  if (!gk.warning.empty()) r.notes.emplace_back("green_kubo", gk.warning);
  r.notes.emplace_back("reference", rep.reference == ReferenceKind::ExactGaussian ? "exact-gaussian" : "euler-maruyama");

  // Sample file: X_n(t_end) at the last n beside a reference sample of the same size.
  r.sample_columns = {"sample", "reference"};
  std::vector<double> reference = rep.reference_samples;
  if (rep.reference == ReferenceKind::ExactGaussian) {
    const GaussianLaw law = linear_sde_law(spec.a, gk.sigma2, spec.xi, spec.t_end);
    const std::size_t m = rep.final_samples.size();
    reference.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
      reference[i] = law.variance > 0.0
                         ? boost::math::quantile(boost::math::normal(law.mean, std::sqrt(law.variance)), u)
                         : law.mean;
    }
  }
  const std::size_t m = std::min(rep.final_samples.size(), reference.size());
  for (std::size_t i = 0; i < m; ++i) r.samples.push_back({rep.final_samples[i], reference[i]});

  acceptance::Verdict verdict;
  if (rep.reference == ReferenceKind::ExactGaussian) {
    const auto it = std::find_if(rep.rows.begin(), rep.rows.end(),
                                 [](const auto& row) { return row.n == acceptance::kDoublingKsN; });
    const HomogenisationRow& row = it != rep.rows.end() ? *it : rep.rows.back();
    verdict.passed = row.ks < acceptance::kDoublingKsMax;
    verdict.detail = "KS " + format_double(row.ks) + " at n=" + std::to_string(row.n);
  } else {
    verdict.passed = rep.nonincreasing;
    verdict.detail = rep.nonincreasing ? "KS nonincreasing within the 95% critical value"
                                       : "KS increased beyond the 95% critical value";
  }
  r.verdict = verdict;
  return r;
}

ExperimentResult run_selftest(const ExperimentConfig& c) {
  ExperimentResult r;
  r.columns = {"property", "passed", "instances", "failures", "max_error"};
  bool all = true;
  std::ostringstream d;
  for (const PropertyResult& p : run_property_suite(c.seed)) {
    r.rows.push_back({p.name, p.passed ? 1.0 : 0.0, static_cast<double>(p.instances),
                      static_cast<double>(p.failures), p.max_error});
    r.notes.emplace_back(p.name, p.detail + " (" + format_double(p.seconds) + " s)");
    all = all && p.passed;
    if (!p.passed) d << (d.tellp() > 0 ? ", " : "") << p.name;
  }
  r.verdict = acceptance::Verdict{all, all ? "all properties hold" : "failed: " + d.str()};
  return r;
}

std::string csv_cell(const Cell& c) {
  if (const double* x = std::get_if<double>(&c)) return format_double(*x);
  const std::string& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

json json_number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kExperimentNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

ExperimentKind parse_experiment(const std::string& name) {
  for (const auto& [k, n] : kExperimentNames) {
    if (name == n) return k;
  }
  throw ConfigError("key 'experiment': unknown experiment '" + name + "'");
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::int64_t> parse_n_list(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == item.size() && !item.empty(), "key 'n_list': '" + item + "' is not an integer");
    out.push_back(v);
  }
  require(!out.empty(), "key 'n_list': empty list");
  return out;
}

std::vector<std::int64_t> parse_n_pow(const std::string& text) {
  int lo = 0, hi = 0;
  char colon = 0;
  std::istringstream in(text);
  require(static_cast<bool>(in >> lo >> colon >> hi) && colon == ':' && in.peek() == EOF,
          "key 'n_pow': expected lo:hi, got '" + text + "'");
  require(lo >= 0 && lo <= hi && hi <= 22, "key 'n_pow': need 0 <= lo <= hi <= 22");
  return pow2_range(lo, hi);
}

HolderObservable make_observable(const std::string& id, const MapSystem& map, std::uint64_t seed) {
  HolderObservable base = HolderObservable::constant(0.0);
  double lebesgue_mean = 0.0;
  if (id == "cos") {
    base = HolderObservable::cosine(1.0);
  } else if (id == "sin") {
    base = HolderObservable::cosine(1.0, 0, -0.5 * std::numbers::pi);
  } else if (id == "x") {
    base = HolderObservable::coordinate(0);
    lebesgue_mean = 0.5;
  } else if (id == "y" && map.state_dim() == 2) {
    base = HolderObservable::coordinate(1);
    lebesgue_mean = 0.5;
  } else {
    throw ConfigError("unknown observable '" + id + "' for map " + to_string(map.kind()));
  }
  // Lebesgue measure is invariant for the doubling map, so its means are exact.
  if (map.kind() == MapKind::Doubling) return base.with_offset(lebesgue_mean, 0.0, true);
  // Offset error grows like sqrt(n) in the sums, hence the large sample; the
  // seed is remapped so centering orbits differ from experiment orbits.
  return center(base, map, {.samples = 100'000'000, .seed = seed ^ 0x5EEDC3A7E1ULL, .orbit_len = 100'000});
}

ExperimentConfig config_from_json(const json& j) {
  require(j.is_object(), "configuration must be a JSON object");
  for (const auto& [key, value] : j.items()) require(kKeys.count(key) > 0, "unknown key '" + key + "'");
  require(j.contains("experiment"), "missing required key 'experiment'");
  require(j.contains("seed"), "missing required key 'seed'");

  ExperimentConfig c;
  c.experiment = parse_experiment(get<std::string>(j, "experiment"));
  c.seed = static_cast<std::uint64_t>(get_nonnegative(j, "seed"));
  if (j.contains("map")) {
    try {
      c.map = parse_map_kind(get<std::string>(j, "map"));
    } catch (const std::invalid_argument&) {
      throw ConfigError("key 'map': expected doubling, lsv or baker");
    }
  }
  if (j.contains("alpha")) c.alpha = get<double>(j, "alpha");
  require(c.alpha > 0.0 && c.alpha < 1.0, "key 'alpha': alpha must be in (0,1)");
  if (j.contains("beta")) c.beta = get<double>(j, "beta");
  require(c.beta > 1.0, "key 'beta': beta must exceed 1");
  if (j.contains("theta")) c.theta = get<double>(j, "theta");
  require(c.theta > 0.0 && c.theta <= 1.0, "key 'theta': theta must be in (0,1]");
  if (j.contains("gamma")) {
    c.gamma = get<double>(j, "gamma");
  } else {
    c.gamma = c.map == MapKind::Doubling ? 2.0 : std::max(1.0, 1.0 / c.alpha - 1.0);
  }
  require(c.gamma >= 1.0, "key 'gamma': gamma must be at least 1");
  if (j.contains("p")) c.p = get<double>(j, "p");
  require(c.p >= 1.0, "key 'p': p must be at least 1");
  if (j.contains("k")) c.k = get_nonnegative(j, "k");
  require(c.k >= 1 && c.k <= 64, "key 'k': k must be in 1..64");
  if (j.contains("threads")) c.threads = static_cast<unsigned>(get_nonnegative(j, "threads"));
  require(c.threads <= 1024, "key 'threads': at most 1024");
  if (j.contains("out")) c.out = get<std::string>(j, "out");
  if (j.contains("check")) c.check = get<bool>(j, "check");
  if (j.contains("v")) c.v = get<std::string>(j, "v");
  c.w = j.contains("w") ? get<std::string>(j, "w") : c.v;
  for (const auto& [key, id] : {std::pair{"v", c.v}, std::pair{"w", c.w}}) {
    require(id == "cos" || id == "sin" || id == "x" || (id == "y" && c.map == MapKind::Baker),
            std::string("key '") + key + "': expected cos, sin, x or y (baker)");
  }
  if (j.contains("functional")) c.functional = get<std::string>(j, "functional");
  require(c.functional == "tanh" || c.functional == "power", "key 'functional': expected tanh or power");
  if (j.contains("drift")) c.drift = get<std::string>(j, "drift");
  require(c.drift == "zero" || c.drift == "ou", "key 'drift': expected zero or ou");
  if (j.contains("xi")) c.xi = get<double>(j, "xi");
  require(std::isfinite(c.xi), "key 'xi': must be finite");
  if (j.contains("reference")) c.reference = get<std::string>(j, "reference");
  require(c.reference == "auto" || c.reference == "exact" || c.reference == "euler",
          "key 'reference': expected auto, exact or euler");
  if (j.contains("max_lag")) {
    c.max_lag = get_nonnegative(j, "max_lag");
    require(c.max_lag >= 1, "key 'max_lag': must be at least 1");
  } else {
    c.max_lag = c.map == MapKind::Doubling ? 50 : std::int64_t{1} << 14;
  }

  require(!(j.contains("n_list") && j.contains("n_pow")), "keys 'n_list' and 'n_pow' are exclusive");
  if (j.contains("n_list")) {
    if (j.at("n_list").is_string()) {
      c.n_list = parse_n_list(j.at("n_list").get<std::string>());
    } else {
      c.n_list = get<std::vector<std::int64_t>>(j, "n_list");
    }
  } else if (j.contains("n_pow")) {
    c.n_list = parse_n_pow(get<std::string>(j, "n_pow"));
  } else {
    switch (c.experiment) {
      case ExperimentKind::Moments:
      case ExperimentKind::IteratedMoments:
      case ExperimentKind::TowerPsi: c.n_list = pow2_range(6, 14); break;
      case ExperimentKind::Correlation:
      case ExperimentKind::Fcb: c.n_list = pow2_range(4, 10); break;
      case ExperimentKind::Weakdep: c.n_list = pow2_range(4, 12); break;
      case ExperimentKind::Fastslow: c.n_list = {1 << 10, 1 << 12, 1 << 14}; break;
      case ExperimentKind::Selftest: break;
    }
  }
  std::sort(c.n_list.begin(), c.n_list.end());
  c.n_list.erase(std::unique(c.n_list.begin(), c.n_list.end()), c.n_list.end());
  for (std::int64_t n : c.n_list) {
    require(n >= 1 && n <= static_cast<std::int64_t>(kMaxStreamLength), "key 'n_list': entries must be in 1..2^22");
  }
  if (c.experiment == ExperimentKind::Weakdep) {
    for (std::int64_t n : c.n_list) require(n >= 2 * c.k, "key 'n_list': weakdep needs n >= 2k");
  }

  if (j.contains("trials")) {
    c.trials = static_cast<std::size_t>(get_nonnegative(j, "trials"));
    const std::size_t least = c.experiment == ExperimentKind::Fcb ? 2 : 100;
    require(c.trials >= least, "key 'trials': at least " + std::to_string(least));
  } else {
    switch (c.experiment) {
      case ExperimentKind::Moments:
      case ExperimentKind::IteratedMoments: c.trials = 10'000; break;
      case ExperimentKind::Correlation: c.trials = 1000; break;
      case ExperimentKind::TowerPsi: c.trials = 100'000; break;
      case ExperimentKind::Weakdep: c.trials = 50'000; break;
      case ExperimentKind::Fcb: c.trials = 256; break;
      case ExperimentKind::Fastslow: c.trials = 20'000; break;
      case ExperimentKind::Selftest: c.trials = 0; break;
    }
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  return {
      {"experiment", to_string(c.experiment)},
      {"map", to_string(c.map)},
      {"alpha", c.alpha},
      {"beta", c.beta},
      {"theta", c.theta},
      {"gamma", c.gamma},
      {"p", c.p},
      {"n_list", c.n_list},
      {"k", c.k},
      {"trials", c.trials},
      {"seed", c.seed},
      {"threads", c.threads},
      {"out", c.out},
      {"check", c.check},
      {"v", c.v},
      {"w", c.w},
      {"functional", c.functional},
      {"drift", c.drift},
      {"xi", c.xi},
      {"reference", c.reference},
      {"max_lag", c.max_lag},
  };
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  set_worker_count(config.threads);
  ExperimentResult r;
  switch (config.experiment) {
    case ExperimentKind::Moments: r = run_moments(config, false); break;
    case ExperimentKind::IteratedMoments: r = run_moments(config, true); break;
    case ExperimentKind::Correlation: r = run_correlation(config); break;
    case ExperimentKind::TowerPsi: r = run_tower(config); break;
    case ExperimentKind::Weakdep: r = run_weakdep(config); break;
    case ExperimentKind::Fcb: r = run_fcb(config); break;
    case ExperimentKind::Fastslow: r = run_fastslow(config); break;
    case ExperimentKind::Selftest: r = run_selftest(config); break;
  }
  r.wall_clock_seconds = elapsed(t0);
  return r;
}

void write_outputs(const ExperimentConfig& config, const ExperimentResult& result) {
  const std::filesystem::path dir(config.out);
  std::filesystem::create_directories(dir);

  std::ofstream csv(dir / "result.csv", std::ios::binary);
  for (std::size_t i = 0; i < result.columns.size(); ++i) csv << (i ? "," : "") << result.columns[i];
  csv << "\n";
  for (const auto& row : result.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) csv << (i ? "," : "") << csv_cell(row[i]);
    csv << "\n";
  }
  if (!csv) throw std::runtime_error("cannot write " + (dir / "result.csv").string());

  if (!result.samples.empty()) {
    std::ofstream s(dir / "samples.csv", std::ios::binary);
    s << result.sample_columns[0] << "," << result.sample_columns[1] << "\n";
    for (const auto& row : result.samples) s << format_double(row[0]) << "," << format_double(row[1]) << "\n";
  }

  json rows = json::array();
  for (const auto& row : result.rows) {
    json out = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (const double* x = std::get_if<double>(&row[i])) {
        out[result.columns[i]] = json_number(*x);
      } else {
        out[result.columns[i]] = std::get<std::string>(row[i]);
      }
    }
    rows.push_back(out);
  }
  json fits = json::object();
  for (const auto& [k, v] : result.fits) fits[k] = json_number(v);
  json notes = json::object();
  for (const auto& [k, v] : result.notes) notes[k] = v;
  json doc = {
      {"software", {{"name", "homog"}, {"version", kSoftwareVersion}}},
      {"config", config_to_json(config)},
      {"workers", worker_count()},
      {"columns", result.columns},
      {"rows", rows},
      {"fits", fits},
      {"notes", notes},
      {"wall_clock_seconds", result.wall_clock_seconds},
  };
  doc["check"] = result.verdict
                     ? json{{"passed", result.verdict->passed}, {"detail", result.verdict->detail}}
                     : json(nullptr);
  std::ofstream(dir / "result.json") << doc.dump(2) << "\n";

  std::ofstream sum(dir / "summary.txt");
  sum << "experiment: " << to_string(config.experiment) << "\n";
  sum << "config: " << config_to_json(config).dump() << "\n";
  sum << "rows: " << result.rows.size() << "\n";
  for (const auto& [k, v] : result.fits) sum << "fit " << k << ": " << format_double(v) << "\n";
  for (const auto& [k, v] : result.notes) sum << "note " << k << ": " << v << "\n";
  if (result.verdict) {
    sum << "check: " << (result.verdict->passed ? "PASS" : "FAIL") << " (" << result.verdict->detail << ")\n";
  }
  sum << "wall clock: " << format_double(result.wall_clock_seconds) << " s\n";
}

int exit_code(const ExperimentConfig& config, const ExperimentResult& result) {
  const bool checked = config.check || config.experiment == ExperimentKind::Selftest;
  return checked && result.verdict && !result.verdict->passed ? 2 : 0;
}

}  // namespace homog
