#include "homog/fastslow.hpp"

#include "doctest.h"

#include <cmath>
#include <vector>

#include "homog/stats.hpp"

using namespace homog;

TEST_CASE("trajectory examples") {
  FastSlowSpec s;
  s.xi = 0.3;
  s.n = 10;
  const std::vector<double> grid{0.0, 0.25, 1.0};
  const auto flat = fastslow_trajectory(s, Point(0.2), grid);
  REQUIRE(flat.has_value());
  for (double x : *flat) CHECK(x == 0.3);

  s.a = {1.0, 0.0};
  const auto drift = fastslow_trajectory(s, Point(0.2), grid);
  REQUIRE(drift.has_value());
  CHECK((*drift)[0] == 0.3);
  CHECK((*drift)[1] == doctest::Approx(0.3 + 2.0 / 10));
  CHECK((*drift)[2] == doctest::Approx(1.3));
}

TEST_CASE("additive noise sums the observable") {
  FastSlowSpec s;
  s.b = NoiseFn::additive();
  s.v = HolderObservable::coordinate(0);
  s.n = 4;
  const std::vector<double> grid{1.0};
  const auto x = fastslow_trajectory(s, Point(0.1), grid);
  REQUIRE(x.has_value());
  CHECK((*x)[0] == doctest::Approx((0.1 + 0.2 + 0.4 + 0.8) / 2.0));
}

TEST_CASE("overflow guard discards a trajectory") {
  FastSlowSpec s;
  s.a = {0.0, 1e4};
  s.xi = 1.0;
  s.n = 2;
  s.t_end = 10.0;
  const std::vector<double> grid{10.0};
  CHECK_FALSE(fastslow_trajectory(s, Point(0.1), grid).has_value());
}

TEST_CASE("green-kubo on the doubling map") {
  const auto v = HolderObservable::affine(1.0, -0.5);
  const auto gk = green_kubo_sigma(MapSystem::doubling(), v, 40,
                                   {.orbits = 64, .orbit_len = 1 << 16, .direct_windows = 4000, .seed = 5});
  // Oracle: 1/12 + 2 sum_l 2^-l / 12 = 1/4.
  CHECK(gk.sigma2 == doctest::Approx(0.25).epsilon(0.04));
  CHECK(std::abs(gk.sigma2 - 0.25) < 4.0 * gk.std_error + 1e-3);
  CHECK(gk.consistent);
  CHECK(gk.direct == doctest::Approx(0.25).epsilon(0.1));
}

TEST_CASE("iterated drift coefficient on the doubling map") {
  const auto v = HolderObservable::affine(1.0, -0.5);
  const auto d = iterated_drift_coeff(MapSystem::doubling(), v, 1024, {.orbits = 20'000, .seed = 6});
  // sum_{l>=1} 2^-l / 12 = 1/12.
  CHECK(d.value == doctest::Approx(1.0 / 12).epsilon(0.1));
  CHECK(d.converged);
}

TEST_CASE("euler-maruyama reproduces the linear law") {
  const SdeCoefficients c{0.5, 0.0};
  Rng rng = make_rng(7);
  std::vector<double> xs(20'000);
  for (auto& x : xs) x = euler_maruyama(c, DriftFn::ornstein_uhlenbeck(), NoiseFn::additive(), 1.0, 1e-3, 1.0, rng);
  const GaussianLaw law = linear_sde_law(DriftFn::ornstein_uhlenbeck(), 0.5, 1.0, 1.0);
  CHECK(law.mean == doctest::Approx(std::exp(-1.0)));
  CHECK(law.variance == doctest::Approx(0.25 * (1.0 - std::exp(-2.0))));
  const double m = mean_of(xs);
  double var = 0.0;
  for (double x : xs) var += (x - m) * (x - m);
  var /= static_cast<double>(xs.size() - 1);
  CHECK(std::abs(m - law.mean) < 4.0 * standard_error(xs));
  CHECK(var == doctest::Approx(law.variance).epsilon(0.03));
  CHECK(ks_distance_to_cdf(xs, [&](double x) { return normal_cdf(x, law.mean, law.variance); }) < 0.02);
  CHECK_THROWS(euler_maruyama(c, DriftFn::zero(), NoiseFn::additive(), 0.0, 0.1, 1.0, rng));
}

TEST_CASE("noise-free ou decays deterministically") {
  Rng rng = make_rng(8);
  const double x = euler_maruyama({0.0, 0.0}, DriftFn::ornstein_uhlenbeck(), NoiseFn::none(), 2.0, 1e-5, 1.0, rng);
  CHECK(x == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-4));
  FastSlowSpec s;
  s.a = DriftFn::ornstein_uhlenbeck();
  s.xi = 2.0;
  s.n = 100'000;
  const std::vector<double> grid{1.0};
  CHECK((*fastslow_trajectory(s, Point(0.3), grid))[0] == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-4));
}

TEST_CASE("doubling fast-slow approaches its gaussian limit") {
  FastSlowSpec s;
  s.a = DriftFn::ornstein_uhlenbeck();
  s.b = NoiseFn::additive();
  s.v = HolderObservable::affine(1.0, -0.5);
  s.xi = 0.5;
  const std::int64_t ns[] = {16, 1024};
  const auto rep = homogenisation_compare(s, {0.25, 0.0}, ns, ReferenceKind::ExactGaussian,
                                          {.paths = 10'000, .seed = 9});
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.reference == ReferenceKind::ExactGaussian);
  CHECK(rep.rows[1].ks < rep.rows[0].ks);
  CHECK(rep.rows[1].ks < 0.03);
  CHECK(rep.nonincreasing);
}
