#include "homog/properties.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "homog/acceptance.hpp"
#include "homog/maps.hpp"
#include "homog/observables.hpp"
#include "homog/random.hpp"
#include "homog/sums.hpp"
#include "homog/tower.hpp"
#include "homog/weakdep.hpp"

namespace homog {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

MapSystem random_map(Rng& rng) {
  const double alpha = 0.1 + 0.8 * uniform01(rng);
  switch (rng() % 3) {
    case 0: return MapSystem::doubling();
    case 1: return MapSystem::lsv(alpha);
    default: return MapSystem::baker(alpha);
  }
}

HolderObservable random_observable(const MapSystem& map, Rng& rng) {
  const int coord = static_cast<int>(rng() % static_cast<std::uint64_t>(map.state_dim()));
  switch (rng() % 4) {
    case 0: return HolderObservable::cosine(1.0 + static_cast<double>(rng() % 3), coord, 6.0 * uniform01(rng));
    case 1: return HolderObservable::affine(2.0 * uniform01(rng) - 1.0, uniform01(rng) - 0.5, coord);
    case 2: {
      std::vector<double> table(2 + rng() % 8);
      for (double& t : table) t = 2.0 * uniform01(rng) - 1.0;
      return HolderObservable::tabulated(std::move(table), coord);
    }
    default: return HolderObservable::coordinate(coord);
  }
}

/// Log-uniform length in [1, max_len].
std::int64_t random_length(Rng& rng, std::int64_t max_len) {
  const double l = std::exp(uniform01(rng) * std::log(static_cast<double>(max_len)));
  return std::clamp<std::int64_t>(static_cast<std::int64_t>(l), 1, max_len);
}

double relative_error(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1.0);
}

void finish(PropertyResult& r, Clock::time_point t0) {
  r.passed = r.failures == 0 && r.instances > 0;
  r.seconds = seconds_since(t0);
  std::ostringstream d;
  d << r.instances << " instances, " << r.failures << " failures, max error " << r.max_error;
  if (!r.detail.empty()) d << "; " << r.detail;
  r.detail = d.str();
}

}  // namespace

PropertyResult chen_property(std::size_t instances, std::uint64_t seed) {
  const auto t0 = Clock::now();
  PropertyResult r;
  r.name = "chen relation";
  for (std::size_t i = 0; i < instances; ++i) {
    Rng rng = make_rng(seed, 0xC4E1, i);
    const MapSystem map = random_map(rng);
    const HolderObservable v = random_observable(map, rng);
    const HolderObservable w = random_observable(map, rng);
    const Point x0 = map.uniform_point(rng);
    const std::int64_t a = static_cast<std::int64_t>(rng() % 100);
    const std::int64_t b = a + random_length(rng, acceptance::kStreamMaxWindow);
    const std::size_t cuts = 1 + rng() % 20;
    std::vector<std::int64_t> edges{a, b};
    for (std::size_t c = 0; c < cuts; ++c) {
      edges.push_back(a + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(b - a + 1)));
    }
    std::sort(edges.begin(), edges.end());
    // One pass along the orbit; each segment is accumulated from its slice.
    std::vector<double> vs, ws;
    Point x = x0;
    for (std::int64_t t = 0; t < b; ++t) {
      if (t >= a) {
        vs.push_back(v(x));
        ws.push_back(w(x));
      }
      x = map.step(x);
    }
    std::vector<SegmentSums> parts;
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
      const auto lo = static_cast<std::size_t>(edges[e] - a);
      const auto len = static_cast<std::size_t>(edges[e + 1] - edges[e]);
      parts.push_back(accumulate_values(std::span(vs).subspan(lo, len), std::span(ws).subspan(lo, len), edges[e]));
    }
    const SegmentSums joined = chen_recombine(parts);
    const double direct = iterated_sum_bruteforce(map, v, w, x0, a, b);
    const double direct_s = birkhoff_sum(map, v, x0, a, b);
    const double err = std::max(relative_error(joined.ss_vw, direct), relative_error(joined.s_v, direct_s));
    r.max_error = std::max(r.max_error, err);
    if (!(err < acceptance::kChenRelTol)) ++r.failures;
    ++r.instances;
  }
  finish(r, t0);
  return r;
}

PropertyResult streaming_property(std::size_t instances, std::int64_t max_window, std::uint64_t seed) {
  const auto t0 = Clock::now();
  PropertyResult r;
  r.name = "streaming vs double loop";
  for (std::size_t i = 0; i < instances; ++i) {
    Rng rng = make_rng(seed, 0x57E, i);
    const MapSystem map = random_map(rng);
    const HolderObservable v = random_observable(map, rng);
    const HolderObservable w = random_observable(map, rng);
    const Point x0 = map.uniform_point(rng);
    const std::int64_t a = static_cast<std::int64_t>(rng() % 100);
    // Every tenth instance uses the longest window.
    const std::int64_t len = i % 10 == 0 ? max_window : random_length(rng, max_window);
    const double stream = iterated_sum_stream(map, v, w, x0, a, a + len).ss_vw;
    const double brute = iterated_sum_bruteforce(map, v, w, x0, a, a + len);
    const double err = relative_error(stream, brute);
    r.max_error = std::max(r.max_error, err);
    if (!(err < acceptance::kStreamRelTol)) ++r.failures;
    ++r.instances;
  }
  finish(r, t0);
  return r;
}

PropertyResult partition_property(std::int64_t max_n, std::int64_t max_k) {
  const auto t0 = Clock::now();
  PropertyResult r;
  r.name = "block scheme bounds";
  for (std::int64_t n = 2; n <= max_n; ++n) {
    for (std::int64_t k = 1; k <= max_k && 2 * k <= n; ++k) {
      const BlockScheme s = block_partition(n, k);
      const auto& a = s.a();
      bool ok = a.front() == 0 && a.back() == n && static_cast<std::int64_t>(a.size()) == 2 * k + 1;
      for (std::size_t i = 0; ok && i + 1 < a.size(); ++i) {
        const std::int64_t d = a[i + 1] - a[i];
        // n/2k - 1 <= d <= n/2k + 1 multiplied through by 2k.
        ok = 2 * k * (d + 1) >= n && 2 * k * (d - 1) <= n;
      }
      for (std::int64_t j = 0; ok && j + 1 < k; ++j) ok = 2 * k * s.gap(j) >= n;
      if (!ok) ++r.failures;
      ++r.instances;
    }
  }
  finish(r, t0);
  return r;
}

PropertyResult lipschitz_property(std::size_t pairs, std::uint64_t seed) {
  const auto t0 = Clock::now();
  PropertyResult r;
  r.name = "power-of-sum bounds";
  struct Case {
    int k;
    double p;
    double radius;
  };
  const Case cases[] = {{2, 1.5, 1.0}, {2, 3.0, 1.0}, {3, 2.0, 2.0}, {4, 4.0, 0.5}};
  std::ostringstream d;
  for (std::size_t c = 0; c < std::size(cases); ++c) {
    const Functional f = Functional::power_of_sum(cases[c].k, cases[c].p, cases[c].radius);
    const LipschitzCheck check = lipschitz_check(f, cases[c].radius, pairs, seed + c);
    r.instances += check.pairs;
    r.failures += check.sup_violations + check.lipschitz_violations;
    r.max_error = std::max(r.max_error, check.max_quotient / f.lipschitz_bound());
    d << (c ? ", " : "") << "k=" << cases[c].k << " p=" << cases[c].p << " max |F|/sup "
      << check.max_abs / f.sup_bound();
  }
  r.detail = d.str() + "; max error is the largest quotient over the declared Lipschitz bound";
  finish(r, t0);
  return r;
}

PropertyResult tower_property(std::size_t tail_draws, std::uint64_t seed) {
  const auto t0 = Clock::now();
  PropertyResult r;
  r.name = "tower identities";
  std::ostringstream d;

  // psi additivity: psi_{n+m}(x) = psi_n(x) + psi_m(f^n x) along one trajectory.
  const TowerSpec pareto{ReturnTimeLaw::pareto(2.5), 0.5};
  std::size_t additivity_failures = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    Rng rng = make_rng(seed, 0xADD, i);
    TowerState x = stationary_start(pareto, rng);
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng() % 200);
    const std::int64_t m = 1 + static_cast<std::int64_t>(rng() % 200);
    for (std::int64_t t = 0; t < n; ++t) x = tower_step(std::move(x), pareto, rng);
    TowerState shifted = x;
    shifted.returns = 0;
    Rng shifted_rng = rng;
    TowerState whole = x;
    for (std::int64_t t = 0; t < m; ++t) {
      whole = tower_step(std::move(whole), pareto, rng);
      shifted = tower_step(std::move(shifted), pareto, shifted_rng);
    }
    if (whole.returns != x.returns + shifted.returns) ++additivity_failures;
    ++r.instances;
  }
  r.failures += additivity_failures;
  d << "additivity failures " << additivity_failures;

  // phi = 1: every step returns, so theta^{psi_n} = theta^n exactly.
  const TowerSpec unit{ReturnTimeLaw::explicit_pmf({1.0}), 0.5};
  std::size_t unit_failures = 0;
  for (double theta : {0.3, 0.5, 0.9}) {
    for (std::int64_t n : {1, 5, 20}) {
      for (auto est : {PsiEstimator::Conditional, PsiEstimator::Direct}) {
        const auto m = theta_psi_moment(unit, theta, n, {.trials = 1000, .seed = seed, .estimator = est});
        const double err = std::abs(m.value - std::pow(theta, static_cast<double>(n)));
        r.max_error = std::max(r.max_error, err);
        if (err != 0.0) ++unit_failures;
        ++r.instances;
      }
    }
  }
  r.failures += unit_failures;
  d << ", phi=1 failures " << unit_failures;

  // P(phi >= n) = n^{-beta} within binomial sigmas.
  for (double beta : {1.5, 2.5, 4.0}) {
    const TowerSpec spec{ReturnTimeLaw::pareto(beta), 0.5};
    Rng rng = make_rng(seed, 0x7A11, static_cast<std::uint64_t>(beta * 10));
    const std::int64_t levels[] = {1, 2, 4, 8, 16};
    std::size_t counts[5] = {};
    for (std::size_t i = 0; i < tail_draws; ++i) {
      const std::int64_t phi = sample_return_time(spec, rng);
      for (std::size_t j = 0; j < 5; ++j) counts[j] += phi >= levels[j];
    }
    for (std::size_t j = 0; j < 5; ++j) {
      const double p = std::pow(static_cast<double>(levels[j]), -beta);
      const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(tail_draws));
      const double err = std::abs(static_cast<double>(counts[j]) / static_cast<double>(tail_draws) - p);
      const bool ok = sigma > 0.0 ? err <= acceptance::kTailSigmas * sigma : err == 0.0;
      if (!ok) {
        ++r.failures;
        d << ", tail miss beta=" << beta << " n=" << levels[j];
      }
      ++r.instances;
    }
  }
  r.detail = d.str();
  finish(r, t0);
  return r;
}

std::vector<PropertyResult> run_property_suite(std::uint64_t seed) {
  return {
      chen_property(acceptance::kChenInstances, seed),
      streaming_property(acceptance::kStreamInstances, acceptance::kStreamMaxWindow, seed),
      partition_property(acceptance::kPartitionMaxN, acceptance::kPartitionMaxK),
      lipschitz_property(acceptance::kLipschitzPairs, seed),
      tower_property(acceptance::kTailDraws, seed),
  };
}

}  // namespace homog
