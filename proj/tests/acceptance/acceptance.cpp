// Runs the numbered acceptance criteria and prints one PASS/FAIL line each.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "homog/acceptance.hpp"
#include "homog/experiments.hpp"
#include "homog/fastslow.hpp"
#include "homog/moments.hpp"
#include "homog/properties.hpp"
#include "homog/stats.hpp"
#include "homog/tower.hpp"
#include "homog/weakdep.hpp"

using namespace homog;
namespace acc = homog::acceptance;

namespace {

std::uint64_t g_seed = 1;

using Verdict = acc::Verdict;

std::string fmt(double x, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

Verdict from_property(const PropertyResult& p, double max_seconds) {
  Verdict v;
  v.passed = p.passed && p.seconds < max_seconds;
  v.detail = p.detail + ", " + fmt(p.seconds, 3) + " s (limit " + fmt(max_seconds, 3) + " s)";
  return v;
}

/// Midpoint rule for int (x - 1/2)(T^l x - 1/2) dx on the doubling map; exact
/// in binary arithmetic for grids of 2^m points.
double doubling_quadrature(int lag) {
  constexpr std::size_t kGrid = std::size_t{1} << 20;
  double sum = 0.0;
  for (std::size_t i = 0; i < kGrid; ++i) {
    const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(kGrid);
    double y = x;
    for (int l = 0; l < lag; ++l) y = doubling_step(y);
    sum += (x - 0.5) * (y - 0.5);
  }
  return sum / static_cast<double>(kGrid);
}

HolderObservable doubling_x() { return make_observable("x", MapSystem::doubling(), g_seed); }

std::optional<ScalingFit> weighted_fit(std::span<const std::int64_t> ns, std::span<const double> values,
                                       std::span<const double> ses) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < values.size(); ++i) pts.emplace_back(static_cast<double>(ns[i]), values[i]);
  if (pts.size() < 3) return std::nullopt;
  return scaling_fit(pts, log_weights(values, ses));
}

std::vector<std::int64_t> pow2(int lo, int hi) {
  std::vector<std::int64_t> out;
  for (int e = lo; e <= hi; ++e) out.push_back(std::int64_t{1} << e);
  return out;
}

// 1-5: exact properties.

Verdict chen() { return from_property(chen_property(acc::kChenInstances, g_seed), 10.0); }

Verdict streaming() {
  return from_property(streaming_property(acc::kStreamInstances, acc::kStreamMaxWindow, g_seed), 30.0);
}

Verdict partition() {
  return from_property(partition_property(acc::kPartitionMaxN, acc::kPartitionMaxK), 10.0);
}

Verdict lipschitz() {
  const PropertyResult p = lipschitz_property(acc::kLipschitzPairs, g_seed);
  return {p.passed, p.detail};
}

Verdict tower_identities() { return from_property(tower_property(acc::kTailDraws, g_seed), 60.0); }

// 6: tower decay.
Verdict tower_rate() {
  Verdict v{true, ""};
  const auto ns = pow2(6, 14);
  for (double beta : {1.5, 2.5, 4.0}) {
    const TowerSpec spec{ReturnTimeLaw::pareto(beta), acc::kTowerTheta};
    const auto est = theta_psi_moments(spec, acc::kTowerTheta, ns, {.trials = acc::kTowerTrials, .seed = g_seed});
    std::vector<double> values, ses;
    for (const auto& m : est) {
      values.push_back(m.value);
      ses.push_back(m.std_error);
    }
    const auto fit = weighted_fit(ns, values, ses);
    const bool ok = fit && acc::tower_band(beta).contains(fit->exponent);
    v.passed = v.passed && ok;
    v.detail += (v.detail.empty() ? "" : ", ") + std::string("beta=") + fmt(beta) + " slope " +
                (fit ? fmt(fit->exponent) : "n/a") + " (target " + fmt(-(beta - 1.0)) + ")";
  }
  return v;
}

// 7: correlation decay.
Verdict correlation() {
  Verdict v;
  const MapSystem lsv = MapSystem::lsv(0.4);
  const HolderObservable cosv = make_observable("cos", lsv, g_seed);
  const auto lags = pow2(4, 10);
  const auto est = autocorrelation(lsv, cosv, lags, {.orbits = 2000, .orbit_len = 100'000, .seed = g_seed});
  std::vector<double> values, ses;
  for (const auto& e : est) {
    values.push_back(std::abs(e.value));
    ses.push_back(e.std_error);
  }
  const std::size_t used = acc::above_noise_prefix(values, ses);
  const auto fit = weighted_fit(std::span(lags).first(used), std::span(values).first(used),
                                std::span(ses).first(used));
  const bool lsv_ok = fit && acc::kLsvCorrelationSlope.contains(fit->exponent);

  const MapSystem dbl = MapSystem::doubling();
  const std::vector<std::int64_t> dlags{1, 2, 3, 4, 5, 6, 7, 8};
  const auto dest = autocorrelation(dbl, doubling_x(), dlags, {.orbits = 1000, .orbit_len = 100'000, .seed = g_seed});
  bool oracle_ok = true;
  double worst = 0.0;
  std::vector<double> xs, logs, dvals, dses;
  for (const auto& e : dest) {
    const double exact = doubling_quadrature(static_cast<int>(e.lag));
    worst = std::max(worst, std::abs(e.value - exact) / e.std_error);
    if (std::abs(e.value - exact) > 4.0 * e.std_error) oracle_ok = false;
    if (e.value > acc::kNoiseFloorMultiple * e.std_error) {
      xs.push_back(static_cast<double>(e.lag));
      logs.push_back(std::log(e.value));
      dvals.push_back(e.value);
      dses.push_back(e.std_error);
    }
  }
  const double ratio = std::exp(linear_fit(xs, logs, log_weights(dvals, dses)).slope);
  const double oracle_ratio = doubling_quadrature(2) / doubling_quadrature(1);
  const bool ratio_ok = acc::kDoublingCorrelationRatio.contains(ratio) &&
                        std::abs(ratio - oracle_ratio) <= 0.5 * (acc::kDoublingCorrelationRatio.high -
                                                                 acc::kDoublingCorrelationRatio.low);
  v.passed = lsv_ok && oracle_ok && ratio_ok;
  v.detail = "LSV slope " + (fit ? fmt(fit->exponent) : std::string("n/a")) + " over " + std::to_string(used) +
             " lags above noise; doubling ratio " + fmt(ratio) + " (quadrature " + fmt(oracle_ratio) +
             "), max |c-oracle|/se " + fmt(worst, 3);
  return v;
}

// 8, 9: moment scaling, one scan per map shared by both criteria.
struct MomentScans {
  std::vector<MomentScanRow> lsv, doubling;
  std::vector<std::int64_t> ns;
};

const MomentScans& moment_scans() {
  static const MomentScans scans = [] {
    MomentScans s;
    s.ns = pow2(8, 15);
    const double gamma = 1.5;
    const MapSystem lsv = MapSystem::lsv(0.4);
    const MomentScanMc mc{.orbits = acc::kMomentOrbits, .windows_per_stream = 100, .seed = g_seed};
    s.lsv = moment_scan(lsv, make_observable("cos", lsv, g_seed), make_observable("x", lsv, g_seed + 1), s.ns,
                        2.0 * gamma, gamma, mc);
    s.doubling = moment_scan(MapSystem::doubling(), doubling_x(), doubling_x(), s.ns, 2.0 * gamma, gamma, mc);
    return s;
  }();
  return scans;
}

std::optional<ScalingFit> scan_fit(const std::vector<MomentScanRow>& rows, bool iterated) {
  std::vector<double> values, ses;
  for (const auto& r : rows) {
    const MomentEstimate& m = iterated ? r.iterated : r.birkhoff;
    values.push_back(m.value);
    ses.push_back(m.std_error);
  }
  return weighted_fit(moment_scans().ns, values, ses);
}

Verdict birkhoff_moments() {
  const auto lsv = scan_fit(moment_scans().lsv, false);
  const auto dbl = scan_fit(moment_scans().doubling, false);
  Verdict v;
  v.passed = lsv && dbl && acc::kLsvBirkhoffExponent.contains(lsv->exponent) &&
             acc::kDoublingBirkhoffExponent.contains(dbl->exponent);
  v.detail = "||S_v(n)||_3 exponent: LSV " + (lsv ? fmt(lsv->exponent) : "n/a") + ", doubling " +
             (dbl ? fmt(dbl->exponent) : "n/a");
  return v;
}

Verdict iterated_moments() {
  const auto lsv = scan_fit(moment_scans().lsv, true);
  const auto dbl = scan_fit(moment_scans().doubling, true);
  Verdict v;
  v.passed = lsv && dbl && acc::kIteratedExponent.contains(lsv->exponent) &&
             acc::kIteratedExponent.contains(dbl->exponent);
  v.detail = "||SS_vw(n)||_1.5 exponent: LSV " + (lsv ? fmt(lsv->exponent) : "n/a") + ", doubling " +
             (dbl ? fmt(dbl->exponent) : "n/a");
  return v;
}

// 10: functional correlation bound.
Verdict fcb() {
  const MapSystem lsv = MapSystem::lsv(0.4);
  const HolderObservable v = make_observable("cos", lsv, g_seed);
  const Functional g = Functional::product_of({v, v, v}, 1);
  const std::int64_t head[] = {0};
  const std::int64_t tail[] = {0, 1};
  const auto gaps = pow2(4, 10);
  const auto est = fcb_functional_experiment(lsv, g, fcb_gap_times(head, tail, gaps), {.pairs = 256, .seed = g_seed});
  std::vector<double> deltas, ses;
  for (const auto& e : est) {
    deltas.push_back(e.delta);
    ses.push_back(e.std_error);
  }
  const std::size_t used = acc::above_noise_prefix(deltas, ses);
  const auto fit = weighted_fit(std::span(gaps).first(used), std::span(deltas).first(used),
                                std::span(ses).first(used));
  Verdict out;
  out.passed = fit && fit->exponent <= acc::kFcbSlopeMax;
  out.detail = "slope " + (fit ? fmt(fit->exponent) + " +- " + fmt(fit->exponent_std_error, 2) : std::string("n/a")) +
               " over gaps 16.." + std::to_string(used ? gaps[used - 1] : 0) + " (noise floor from gap " +
               (used < gaps.size() ? std::to_string(gaps[used]) : std::string("none")) + ")";
  return out;
}

// 11: coupling.
Verdict coupling() {
  const auto run = [](const MapSystem& map, const HolderObservable& v, const std::vector<std::int64_t>& ns,
                      std::optional<std::int64_t> max_gap) {
    const auto rep = weakdep_gap_experiment(map, v, Functional::tanh_product(2), ns, 2, {.trials = 50'000, .seed = g_seed});
    std::vector<std::int64_t> gaps;
    std::vector<double> deltas, ses;
    for (const auto& r : rep.rows) {
      gaps.push_back(r.gap);
      deltas.push_back(r.delta);
      ses.push_back(r.std_error);
    }
    return acc::coupling_verdict(gaps, deltas, ses, max_gap);
  };
  const MapSystem lsv = MapSystem::lsv(0.4);
  const Verdict l = run(lsv, make_observable("cos", lsv, g_seed), pow2(4, 12), std::nullopt);
  const Verdict d = run(MapSystem::doubling(), doubling_x(), {4, 8, 16, 32, 64, 128, 240},
                        acc::kDoublingWeakdepHorizon);
  return {l.passed && d.passed, "LSV: " + l.detail + "; doubling: " + d.detail};
}

// 12: homogenisation.
Verdict homogenisation() {
  FastSlowSpec dspec;
  dspec.b = NoiseFn::additive();
  dspec.v = doubling_x();
  dspec.xi = 0.0;
  const auto dgk = green_kubo_sigma(MapSystem::doubling(), dspec.v, 50, {.seed = g_seed + 7});
  const std::int64_t dn[] = {acc::kDoublingKsN};
  const auto drep = homogenisation_compare(dspec, {dgk.sigma2, 0.0}, dn, ReferenceKind::ExactGaussian,
                                           {.paths = acc::kHomogenisationPaths, .seed = g_seed});
  const bool dok = drep.rows[0].ks < acc::kDoublingKsMax;

  const MapSystem lsv = MapSystem::lsv(0.4);
  FastSlowSpec lspec;
  lspec.b = NoiseFn::additive();
  lspec.v = make_observable("cos", lsv, g_seed);
  lspec.fast_map = lsv;
  const auto lgk = green_kubo_sigma(lsv, lspec.v, std::int64_t{1} << 14, {.seed = g_seed + 7});
  const std::int64_t ln[] = {1 << 10, 1 << 12, 1 << 14};
  const auto lrep = homogenisation_compare(lspec, {lgk.sigma2, 0.0}, ln, ReferenceKind::EulerMaruyama,
                                           {.paths = 20'000, .reference_paths = 20'000, .seed = g_seed});
  std::string ks;
  for (const auto& r : lrep.rows) ks += (ks.empty() ? "" : ", ") + fmt(r.ks, 3);
  return {dok && lrep.nonincreasing, "doubling KS " + fmt(drep.rows[0].ks, 3) + " at n=2^14 (sigma2 " +
                                         fmt(dgk.sigma2) + "); LSV KS " + ks + " (sigma2 " + fmt(lgk.sigma2) +
                                         " +- " + fmt(lgk.std_error, 2) + ")"};
}

// 13: Green-Kubo.
Verdict green_kubo() {
  const auto gk = green_kubo_sigma(MapSystem::doubling(), doubling_x(), 50, {.seed = g_seed});
  double oracle = doubling_quadrature(0);
  for (int l = 1; l <= 50; ++l) oracle += 2.0 * doubling_quadrature(l);
  const bool ok = acc::kGreenKuboDoubling.contains(gk.sigma2) && acc::kGreenKuboDoubling.contains(oracle) &&
                  std::abs(gk.sigma2 - oracle) <= 4.0 * gk.std_error + 1e-12;
  return {ok, "sigma2 " + fmt(gk.sigma2, 6) + " +- " + fmt(gk.std_error, 2) + ", quadrature series " +
                  fmt(oracle, 6)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  app.add_option("--only", only, "criterion numbers to run");
  app.add_option("--seed", g_seed, "master seed");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "Chen relation", chen},
      {2, "streaming vs double loop", streaming},
      {3, "block scheme bounds", partition},
      {4, "power-of-sum bounds", lipschitz},
      {5, "tower identities", tower_identities},
      {6, "tower decay rate", tower_rate},
      {7, "correlation decay", correlation},
      {8, "Birkhoff moment scaling", birkhoff_moments},
      {9, "iterated moment scaling", iterated_moments},
      {10, "functional correlation bound rate", fcb},
      {11, "block coupling", coupling},
      {12, "homogenisation", homogenisation},
      {13, "Green-Kubo cross-check", green_kubo},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %s  %s: %s [%.1f s]\n", c.id, v.passed ? "PASS" : "FAIL", c.name, v.detail.c_str(),
                secs);
    std::fflush(stdout);
    failures += !v.passed;
  }
  return failures == 0 ? 0 : 1;
}
