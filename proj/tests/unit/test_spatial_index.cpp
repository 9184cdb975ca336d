#include <doctest.h>

#include <algorithm>

#include "pointmatch/random.hpp"
#include "pointmatch/spatial_index.hpp"
#include "support/brute.hpp"

using namespace pm;

TEST_CASE("single point and empty index") {
  const Domain dom(2, 5.0);
  const ColoredPointSet one(dom, {1.0, 2.0}, {Color::Red});
  SpatialIndex idx(one, 1.0);
  const double q[] = {4.9, 0.1};
  REQUIRE(idx.nearest(q).has_value());
  CHECK(idx.nearest(q)->index == 0);
  idx.remove(0);
  CHECK(idx.empty());
  CHECK_FALSE(idx.nearest(q).has_value());
  CHECK_THROWS(SpatialIndex(one, 0.0));
}

TEST_CASE("nearest after deleting the nearest is the second nearest") {
  const Domain dom(1, 100.0, Boundary::Box);
  const ColoredPointSet pts(dom, {10, 12, 15, 40}, std::vector<Color>(4, Color::Red));
  SpatialIndex idx(pts, 1.0);
  const double q[] = {11.5};
  CHECK(idx.nearest(q)->index == 1);
  idx.remove(1);
  CHECK(idx.nearest(q)->index == 0);
  idx.remove(0);
  CHECK(idx.nearest(q)->index == 2);
}

TEST_CASE("index agrees with linear scan on random configurations") {
  int configs = 0;
  for (int s = 0; s < 1000; ++s) {
    const int d = 1 + s % 3;
    const Boundary b = (s / 3) % 2 ? Boundary::Box : Boundary::Torus;
    const double side = 2.0 + (s % 7);
    const Domain dom(d, side, b);
    const auto pts = sample_poisson(dom, 3.0, Color::Red, derive_seed(77, 0, s));
    if (pts.size() < 2) continue;
    ++configs;
    const double cell = (s % 5 == 0 ? 0.3 : 1.0) * SpatialIndex::default_cell_size(dom, pts.size());
    SpatialIndex idx(pts, cell);
    Rng rng(derive_seed(77, 1, s));
    for (int k = 0; k < 5; ++k) {
      std::vector<double> q(d);
      for (auto& v : q) v = side * uniform01(rng);
      const auto got = idx.nearest(q);
      REQUIRE(got.has_value());
      REQUIRE(got->index == brute::nearest(pts, q));
    }
    // Delete a third of the points and compare with a scan over the survivors.
    std::vector<char> alive(pts.size(), 1);
    for (std::uint32_t i = 0; i < pts.size(); i += 3) {
      idx.remove(i);
      alive[i] = 0;
    }
    idx.compact();
    for (std::uint32_t i = 0; i < pts.size(); ++i) {
      const auto got = idx.nearest(pts.point(i), [&](std::uint32_t j) { return j != i; });
      std::int64_t best = -1;
      double bd = 1e300;
      for (std::uint32_t j = 0; j < pts.size(); ++j)
        if (alive[j] && j != i && pts.distance2(i, j) < bd) bd = pts.distance2(i, j), best = j;
      if (best < 0) {
        REQUIRE_FALSE(got.has_value());
      } else {
        REQUIRE(got.has_value());
        REQUIRE(static_cast<std::int64_t>(got->index) == best);
      }
    }
  }
  CHECK(configs > 900);
}

TEST_CASE("every live point in exactly one bucket") {
  const Domain dom(2, 10.0);
  const auto pts = sample_poisson(dom, 1.0, Color::Red, 5);
  SpatialIndex idx(pts, 1.0);
  for (std::uint32_t i = 0; i < pts.size(); i += 2) idx.remove(i);
  auto live = idx.live_points();
  std::sort(live.begin(), live.end());
  CHECK(std::adjacent_find(live.begin(), live.end()) == live.end());
  CHECK(live.size() == idx.size());
  for (auto i : live) CHECK(i % 2 == 1);
  CHECK_FALSE(idx.remove(0));
}

TEST_CASE("range query matches scan") {
  const Domain dom(2, 6.0);
  const auto pts = sample_poisson(dom, 2.0, Color::Red, 9);
  SpatialIndex idx(pts, 0.7);
  for (std::uint32_t i = 0; i < pts.size(); ++i) {
    std::vector<std::uint32_t> got, want;
    idx.for_each_within(pts.point(i), 1.3, [&](std::uint32_t j, double) { got.push_back(j); });
    for (std::uint32_t j = 0; j < pts.size(); ++j)
      if (pts.distance2(i, j) < 1.3 * 1.3) want.push_back(j);
    std::sort(got.begin(), got.end());
    REQUIRE(got == want);
  }
}
