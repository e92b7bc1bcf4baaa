#include "homog/weakdep.hpp"

#include "doctest.h"

#include <cmath>
#include <vector>

#include "homog/stats.hpp"

using namespace homog;

TEST_CASE("block_rvs example on the doubling map") {
  const auto x = block_rvs(MapSystem::doubling(), HolderObservable::coordinate(0), block_partition(10, 2),
                           Point(0.1));
  const auto o = orbit(MapSystem::doubling(), Point(0.1), 10);
  REQUIRE(x.size() == 2);
  CHECK(x[0] == doctest::Approx(o[0].x() + o[1].x()));
  CHECK(x[1] == doctest::Approx(o[5].x() + o[6].x()));
  CHECK(x[0] == doctest::Approx(0.3));
  CHECK(x[1] == doctest::Approx(0.6));
}

TEST_CASE("independent copies have the law of a single block sum") {
  const MapSystem m = MapSystem::doubling();
  const auto v = HolderObservable::affine(1.0, -0.5);
  const BlockScheme s = block_partition(40, 2);
  Rng rng = make_rng(3);
  std::vector<double> first, second;
  for (int i = 0; i < 20'000; ++i) {
    const auto c = independent_copies(m, v, s, rng);
    first.push_back(c[0]);
    second.push_back(c[1]);
  }
  Rng rr = make_rng(4);
  std::vector<double> direct;
  for (int i = 0; i < 20'000; ++i) {
    OrbitStream o(m, rr);
    direct.push_back(block_rvs(m, v, s, o.current())[0]);
  }
  CHECK(ks_distance(first, direct) < 0.02);
  CHECK(ks_distance(second, direct) < 0.02);
}

TEST_CASE("functional bounds") {
  const auto t = Functional::tanh_product(3);
  CHECK(t.sup_bound() == 1.0);
  CHECK(t.lipschitz_bound() == 1.0);
  const std::vector<double> y{0.5, -1.0, 2.0};
  CHECK(t(y) == doctest::Approx(std::tanh(0.5) * std::tanh(-1.0) * std::tanh(2.0)));
  const auto p = Functional::power_of_sum(2, 3.0, 2.0);
  CHECK(p.sup_bound() == doctest::Approx(64.0));
  CHECK(p.lipschitz_bound() == doctest::Approx(48.0));
  const std::vector<double> big{5.0, 5.0};
  CHECK(p(big) == doctest::Approx(64.0));
  for (const Functional& f : {t, p, Functional::power_of_sum(3, 1.5, 1.0)}) {
    const auto c = lipschitz_check(f, 2.0, 100'000, 5);
    CHECK(c.sup_violations == 0);
    CHECK(c.lipschitz_violations == 0);
    CHECK(c.max_abs <= f.sup_bound() * (1 + 1e-12));
  }
}

TEST_CASE("weakdep is zero for constant functionals and single blocks") {
  const MapSystem m = MapSystem::doubling();
  const auto v = HolderObservable::affine(1.0, -0.5);
  const std::int64_t ns[] = {16, 64};
  const auto c = Functional::user(2, [](std::span<const double>) { return 0.7; }, 0.7, 0.0);
  const auto rc = weakdep_gap_experiment(m, v, c, ns, 2, {.trials = 2000, .seed = 2});
  for (const auto& r : rc.rows) CHECK(r.delta == 0.0);
  const auto r1 = weakdep_gap_experiment(m, v, Functional::tanh_product(1), ns, 1, {.trials = 20'000, .seed = 3});
  for (const auto& r : r1.rows) {
    CHECK(r.delta <= 4.0 * r.std_error + 1e-15);
    CHECK(r.gap == r.n / 2);
  }
}

TEST_CASE("weakdep decays for the doubling map") {
  const MapSystem m = MapSystem::doubling();
  const auto v = HolderObservable::affine(1.0, -0.5);
  const std::int64_t ns[] = {4, 8, 64};
  const auto f = Functional::user(
      2, [](std::span<const double> y) { return y[0] * y[1]; }, 1e9, 1e9);
  const auto r = weakdep_gap_experiment(m, v, f, ns, 2, {.trials = 40'000, .seed = 4});
  // n=4: blocks {0} and {2}, E[v v∘T^2] = 1/48. n=8: blocks {0,1},{4,5}: sum of 2^-l/12 over l=3,4,4,5.
  CHECK(r.rows[0].mean_dynamic - r.rows[0].mean_independent ==
        doctest::Approx(1.0 / 48).epsilon(0.2));
  const double exact8 = (1.0 / 8 + 2.0 / 16 + 1.0 / 32) / 12;
  CHECK(std::abs(r.rows[1].mean_dynamic - r.rows[1].mean_independent - exact8) < 4.0 * r.rows[1].std_error);
  CHECK(r.rows[2].below_noise);
  REQUIRE(r.horizon.has_value());
  CHECK(*r.horizon <= 16);
}

TEST_CASE("fcb is null when the tail does not depend on the point") {
  const MapSystem m = MapSystem::doubling();
  const auto g = Functional::product_of(
      {HolderObservable::affine(1.0, -0.5), HolderObservable::constant(2.0)}, 1);
  const std::int64_t times[] = {0, 3};
  const auto e = fcb_functional_experiment(m, g, times, {.pairs = 16, .window = 4096, .seed = 2});
  CHECK(e.delta <= 1e-12);
  CHECK(e.gap == 3);
}

TEST_CASE("fcb matches the correlation on the doubling map") {
  const MapSystem m = MapSystem::doubling();
  const auto x = HolderObservable::affine(1.0, -0.5);
  const auto g = Functional::product_of({x, x}, 1);
  const std::int64_t head[] = {0}, tail[] = {0}, gaps[] = {1, 2, 20};
  const auto times = fcb_gap_times(head, tail, gaps);
  CHECK(times[1] == std::vector<std::int64_t>{0, 2});
  const auto es = fcb_functional_experiment(m, g, times, {.pairs = 64, .window = 1 << 14, .seed = 3});
  CHECK(std::abs(es[0].delta - 1.0 / 24) < 4.0 * es[0].std_error + 1e-4);
  CHECK(std::abs(es[1].delta - 1.0 / 48) < 4.0 * es[1].std_error + 1e-4);
  CHECK(es[2].below_noise);
}
