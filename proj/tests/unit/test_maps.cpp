#include "homog/maps.hpp"

#include "doctest.h"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "homog/stats.hpp"

using namespace homog;

namespace {

// Independent bisection on g(y) - u, iterated to the last representable midpoint.
double bisect_root(double u, double alpha) {
  double lo = 0.0, hi = 0.5;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double g = mid * (1.0 + std::pow(2.0, alpha) * std::pow(mid, alpha));
    (g < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double chi_square_pvalue(const std::vector<std::size_t>& counts, const std::vector<double>& probs,
                         std::size_t total) {
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = probs[i] * static_cast<double>(total);
    stat += (static_cast<double>(counts[i]) - e) * (static_cast<double>(counts[i]) - e) / e;
  }
  boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace

TEST_CASE("lsv_step examples") {
  for (double a : {0.1, 0.4, 0.9}) {
    CHECK(lsv_step(0.0, a) == 0.0);
    CHECK(lsv_step(0.5, a) == 1.0);
    CHECK(lsv_step(0.75, a) == 0.5);
  }
  CHECK(lsv_step(0.25, 0.5) == doctest::Approx(0.25 * (1.0 + std::sqrt(2.0) * 0.5)));
}

TEST_CASE("lsv_step rejects bad arguments") {
  CHECK_THROWS_AS(lsv_step(-0.1, 0.4), std::domain_error);
  CHECK_THROWS_AS(lsv_step(1.1, 0.4), std::domain_error);
  CHECK_THROWS_AS(lsv_step(0.3, 0.0), std::domain_error);
  CHECK_THROWS_AS(lsv_step(0.3, 1.0), std::domain_error);
  CHECK_THROWS_AS(MapSystem::lsv(1.5), std::domain_error);
}

TEST_CASE("g_inverse examples") {
  CHECK(g_inverse(0.0, 0.4, 1e-13) == 0.0);
  CHECK(g_inverse(1.0, 0.4, 1e-13) == 0.5);
  const double y = g_inverse(0.5, 0.5, 1e-12);
  CHECK(y == doctest::Approx(bisect_root(0.5, 0.5)).epsilon(1e-11));
  CHECK(std::abs(y * (1.0 + std::sqrt(2.0) * std::sqrt(y)) - 0.5) <= 1e-12);
  CHECK_THROWS_AS(g_inverse(1.2, 0.4), std::domain_error);
}

TEST_CASE("g_inverse is monotone and inverts g") {
  Rng rng = make_rng(11);
  for (double a : {0.25, 0.4, 0.45}) {
    double prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
      const double u = i / 1000.0;
      const double y = g_inverse(u, a);
      CHECK(y >= prev);
      prev = y;
    }
    for (int i = 0; i < 1000; ++i) {
      const double y = 0.5 * uniform01(rng);
      CHECK(std::abs(g_inverse(lsv_left_branch(y, a), a) - y) <= 10 * kDefaultInverseTol);
    }
  }
}

TEST_CASE("g is strictly increasing on [0,1/2]") {
  Rng rng = make_rng(12);
  for (int i = 0; i < 10000; ++i) {
    double y1 = 0.5 * uniform01(rng), y2 = 0.5 * uniform01(rng);
    if (y1 == y2) continue;
    if (y1 > y2) std::swap(y1, y2);
    CHECK(lsv_left_branch(y1, 0.4) < lsv_left_branch(y2, 0.4));
  }
}

TEST_CASE("baker_step examples") {
  CHECK(baker_step(Point(0.0, 0.0), 0.4) == Point(0.0, 0.0));
  CHECK(baker_step(Point(0.75, 0.0), 0.4) == Point(0.5, 0.5));
  CHECK(baker_step(Point(0.5, 1.0), 0.4) == Point(1.0, 0.5));
  CHECK_THROWS_AS(baker_step(Point(0.5, 1.5), 0.4), std::domain_error);
}

TEST_CASE("doubling_step examples") {
  CHECK(doubling_step(0.0) == 0.0);
  CHECK(doubling_step(0.3) == doctest::Approx(0.6));
  CHECK(doubling_step(0.75) == 0.5);
  CHECK_THROWS_AS(doubling_step(1.5), std::domain_error);
}

TEST_CASE("orbit examples") {
  const auto d = orbit(MapSystem::doubling(), Point(0.1), 2);
  REQUIRE(d.size() == 3);
  CHECK(d[0].x() == 0.1);
  CHECK(d[1].x() == doctest::Approx(0.2));
  CHECK(d[2].x() == doctest::Approx(0.4));
  CHECK(orbit(MapSystem::lsv(0.3), Point(0.2), 0).size() == 1);
  const auto l = orbit(MapSystem::lsv(0.5), Point(0.5), 2);
  CHECK(l[1].x() == 1.0);
  CHECK(l[2].x() == 1.0);
}

TEST_CASE("map kinds parse") {
  CHECK(parse_map_kind("lsv") == MapKind::Lsv);
  CHECK(parse_map_kind("baker") == MapKind::Baker);
  CHECK(to_string(MapKind::Doubling) == "doubling");
  CHECK_THROWS_AS(parse_map_kind("tent"), std::invalid_argument);
  CHECK(MapSystem::lsv(0.4).beta() == doctest::Approx(2.5));
  CHECK(std::isinf(MapSystem::doubling().beta()));
  CHECK(MapSystem::baker(0.4).state_dim() == 2);
}

TEST_CASE("steps stay in the unit interval or square") {
  Rng rng = make_rng(5);
  for (const MapSystem& m : {MapSystem::doubling(), MapSystem::lsv(0.4), MapSystem::baker(0.4)}) {
    const int starts = m.kind() == MapKind::Baker ? 200 : 100000;
    for (int s = 0; s < starts; ++s) {
      Point p = m.uniform_point(rng);
      for (int i = 0; i < 1000; ++i) {
        p = m.step(p);
        for (int c = 0; c < m.state_dim(); ++c) REQUIRE((p[c] >= 0.0 && p[c] <= 1.0));
      }
    }
  }
}

TEST_CASE("lsv pushes points away from the neutral fixed point") {
  Rng rng = make_rng(6);
  for (int i = 0; i < 10000; ++i) {
    const double x = 0.5 * uniform_open_closed(rng);
    CHECK(lsv_step(x, 0.4) > x);
  }
}

TEST_CASE("sample_invariant with no burn-in is the uniform draw") {
  Rng rng = make_rng(42);
  const double u = static_cast<double>(rng() >> 11) * 0x1p-53;
  CHECK(sample_invariant(MapSystem::doubling(), 42, 0).x() == u);
}

TEST_CASE("doubling stream is uniform (chi-square)") {
  const MapSystem m = MapSystem::doubling();
  Rng rng = make_rng(7);
  constexpr int kBins = 50;
  std::vector<std::size_t> counts(kBins, 0);
  std::size_t total = 0;
  for (int o = 0; o < 1000; ++o) {
    OrbitStream s(m, rng);
    for (int i = 0; i < 1000; ++i) {
      ++counts[std::min(kBins - 1, static_cast<int>(s.current().x() * kBins))];
      ++total;
      s.advance();
    }
  }
  CHECK(chi_square_pvalue(counts, std::vector<double>(kBins, 1.0 / kBins), total) > 0.01);
}

TEST_CASE("doubling map preserves Lebesgue measure") {
  Rng rng = make_rng(8);
  std::vector<double> pushed(1'000'000);
  for (auto& x : pushed) x = doubling_step(uniform01(rng));
  CHECK(ks_distance_to_cdf(pushed, [](double x) { return std::clamp(x, 0.0, 1.0); }) < 0.005);
}

TEST_CASE("lsv invariant density blows up at zero") {
  const MapSystem m = MapSystem::lsv(0.4);
  Rng rng = make_rng(9);
  std::vector<double> xs;
  for (int o = 0; o < 250; ++o) {
    OrbitStream s(m, rng);
    for (int i = 0; i < 4000; ++i) {
      xs.push_back(s.current().x());
      s.advance();
    }
  }
  // Mass of [0, eps] scales like eps^{1-alpha}: log-log slope near 0.6.
  std::vector<std::pair<double, double>> pts;
  for (double eps : {1e-4, 1e-3, 1e-2}) {
    const auto c = std::count_if(xs.begin(), xs.end(), [&](double x) { return x <= eps; });
    pts.emplace_back(eps, static_cast<double>(c) / static_cast<double>(xs.size()));
  }
  const ScalingFit fit = scaling_fit(pts);
  CHECK(fit.exponent == doctest::Approx(0.6).epsilon(0.1 / 0.6));
  // Density ratio between [0,eps] and a same-width bin at 0.25 grows as eps shrinks.
  const auto mass = [&](double a, double b) {
    return static_cast<double>(std::count_if(xs.begin(), xs.end(), [&](double x) { return x >= a && x < b; }));
  };
  CHECK(mass(0.0, 1e-3) / mass(0.25, 0.251) > mass(0.0, 1e-2) / mass(0.25, 0.26));
}

TEST_CASE("orbit streams are reproducible") {
  for (const MapSystem& m : {MapSystem::doubling(), MapSystem::lsv(0.4), MapSystem::baker(0.4)}) {
    Rng a = make_rng(3, 1), b = make_rng(3, 1);
    OrbitStream sa(m, a), sb(m, b);
    for (int i = 0; i < 100; ++i) {
      CHECK(sa.current() == sb.current());
      sa.advance();
      sb.advance();
    }
  }
}
