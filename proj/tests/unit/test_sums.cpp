#include "homog/sums.hpp"

#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace homog;

namespace {

const MapSystem kDoubling = MapSystem::doubling();
const HolderObservable kId = HolderObservable::coordinate(0);

}  // namespace

TEST_CASE("birkhoff_sum examples") {
  CHECK(birkhoff_sum(kDoubling, kId, Point(0.1), 0, 3) == doctest::Approx(0.7));
  CHECK(birkhoff_sum(kDoubling, kId, Point(0.1), 1, 3) == doctest::Approx(0.6));
  CHECK(birkhoff_sum(kDoubling, kId, Point(0.1), 2, 2) == 0.0);
  CHECK_THROWS_AS(birkhoff_sum(kDoubling, kId, Point(0.1), 3, 2), std::invalid_argument);
}

TEST_CASE("iterated_sum_stream examples") {
  const SegmentSums s = iterated_sum_stream(kDoubling, kId, kId, Point(0.1), 0, 3);
  CHECK(s.ss_vw == doctest::Approx(0.1 * 0.2 + 0.1 * 0.4 + 0.2 * 0.4));
  CHECK(s.s_v == doctest::Approx(0.7));
  CHECK(iterated_sum_stream(kDoubling, kId, kId, Point(0.1), 4, 5).ss_vw == 0.0);
  const auto zero = HolderObservable::constant(0.0);
  CHECK(iterated_sum_stream(MapSystem::lsv(0.4), zero, kId, Point(0.3), 0, 100).ss_vw == 0.0);
}

TEST_CASE("iterated_sum_bruteforce examples") {
  const auto o = orbit(kDoubling, Point(0.1), 2);
  CHECK(iterated_sum_bruteforce(kDoubling, kId, kId, Point(0.1), 0, 2) == o[0].x() * o[1].x());
  CHECK(iterated_sum_bruteforce(kDoubling, kId, kId, Point(0.1), 1, 1) == 0.0);
  CHECK_THROWS_AS(iterated_sum_bruteforce(kDoubling, kId, kId, Point(0.1), 0, 200'000),
                  std::invalid_argument);
}

TEST_CASE("streaming agrees with the double loop") {
  Rng rng = make_rng(21);
  const auto v = HolderObservable::cosine(1).with_offset(0.1, 0.0, true);
  const auto w = HolderObservable::coordinate(0).with_offset(0.4, 0.0, true);
  for (int i = 0; i < 20; ++i) {
    const Point x0(uniform01(rng));
    const auto a = static_cast<std::int64_t>(uniform01(rng) * 50);
    const auto b = a + static_cast<std::int64_t>(uniform01(rng) * 2000);
    const MapSystem m = MapSystem::lsv(0.4);
    const double brute = iterated_sum_bruteforce(m, v, w, x0, a, b);
    const double stream = iterated_sum_stream(m, v, w, x0, a, b).ss_vw;
    CHECK(std::abs(stream - brute) <= 1e-9 * std::max(1.0, std::abs(brute)));
  }
}

TEST_CASE("block_partition examples") {
  CHECK(block_partition(10, 2).a() == std::vector<std::int64_t>{0, 2, 5, 7, 10});
  CHECK(block_partition(12, 3).a() == std::vector<std::int64_t>{0, 2, 4, 6, 8, 10, 12});
  const auto s = block_partition(8, 4);
  for (std::int64_t i = 0; i <= 8; ++i) CHECK(s.a()[static_cast<std::size_t>(i)] == i);
  CHECK(s.lower(1) == 2);
  CHECK(s.upper(1) == 2);
  CHECK_THROWS_AS(block_partition(3, 2), std::invalid_argument);
  CHECK_THROWS_AS(block_partition(10, 0), std::invalid_argument);
}

TEST_CASE("block scheme spacing bounds") {
  for (std::int64_t n = 2; n <= 600; ++n) {
    for (std::int64_t k = 1; 2 * k <= n && k <= 64; ++k) {
      const BlockScheme s = block_partition(n, k);
      const auto& a = s.a();
      for (std::size_t i = 0; i + 1 < a.size(); ++i) {
        const std::int64_t d = a[i + 1] - a[i];
        // n/2k - 1 <= d <= n/2k + 1, in integers: 2k(d+1) >= n and 2k(d-1) <= n.
        CHECK(2 * k * (d + 1) >= n);
        CHECK(2 * k * (d - 1) <= n);
      }
      for (std::int64_t r = 0; r + 1 < k; ++r) CHECK(2 * k * s.gap(r) >= n);
    }
  }
}

TEST_CASE("chen_recombine examples") {
  const Point x0(0.1);
  const SegmentSums a = iterated_sum_stream(kDoubling, kId, kId, x0, 0, 2);
  const SegmentSums b = iterated_sum_stream(kDoubling, kId, kId, x0, 2, 5);
  const SegmentSums whole = iterated_sum_stream(kDoubling, kId, kId, x0, 0, 5);
  const SegmentSums parts[] = {a, b};
  const SegmentSums joined = chen_recombine(parts);
  CHECK(joined.ss_vw == doctest::Approx(whole.ss_vw).epsilon(1e-14));
  CHECK(joined.s_v == doctest::Approx(whole.s_v).epsilon(1e-14));
  CHECK(joined.begin == 0);
  CHECK(joined.end == 5);

  const SegmentSums single[] = {a};
  const SegmentSums same = chen_recombine(single);
  CHECK(same.ss_vw == a.ss_vw);
  CHECK(same.s_v == a.s_v);

  const std::vector<double> zeros(4, 0.0);
  const SegmentSums z[] = {accumulate_values(zeros, zeros, 0), accumulate_values(zeros, zeros, 4)};
  CHECK(chen_recombine(z).ss_vw == 0.0);
  CHECK(chen_recombine(z).s_v == 0.0);
}

TEST_CASE("chen_recombine rejects bad input") {
  CHECK_THROWS_AS(chen_recombine(std::span<const SegmentSums>{}), std::invalid_argument);
  const SegmentSums gap[] = {{0, 2, 0, 0, 0}, {3, 5, 0, 0, 0}};
  CHECK_THROWS_AS(chen_recombine(gap), std::invalid_argument);
}

TEST_CASE("compensated accumulation matches plain on short windows") {
  std::vector<double> v{0.3, -0.2, 0.7, 0.1}, w{1.0, 0.5, -0.5, 0.25};
  SumAccumulator plain(false), comp(true);
  for (std::size_t i = 0; i < v.size(); ++i) {
    plain.push(v[i], w[i]);
    comp.push(v[i], w[i]);
  }
  CHECK(plain.ss_vw() == doctest::Approx(comp.ss_vw()).epsilon(1e-15));
  CHECK(plain.count() == 4);
}
