#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "pointmatch/analysis.hpp"
#include "pointmatch/constructions.hpp"
#include "pointmatch/random.hpp"
#include "support/brute.hpp"

using namespace pm;

namespace {

ColoredPointSet two_color(const Domain& dom, std::uint64_t seed) {
  return merge(sample_poisson(dom, 1.0, Color::Red, derive_seed(seed, 1, 0)),
               sample_poisson(dom, 1.0, Color::Blue, derive_seed(seed, 2, 0)));
}

}  // namespace

TEST_CASE("k-box id examples") {
  const Domain line(1, 8.0);
  const auto zero = DyadicShifts::zero(1, 3);
  const double x[] = {3.7};
  CHECK(k_box_id(line, x, 0, zero) == std::vector<std::int64_t>{3});
  CHECK(k_box_id(line, x, 2, zero) == std::vector<std::int64_t>{0});
  CHECK_THROWS(dyadic_top_level(Domain(1, 6.0)));
  CHECK(dyadic_top_level(Domain(2, 1024.0)) == 10);
}

TEST_CASE("k-boxes nest and are periodic") {
  Rng rng(4);
  for (int it = 0; it < 100000; ++it) {
    const int d = 1 + it % 3;
    const int top = 6;
    const Domain dom(d, 64.0);
    const auto shifts = DyadicShifts::random(d, top, rng());
    std::vector<double> x(d);
    for (auto& v : x) v = 64.0 * uniform01(rng);
    const int k = static_cast<int>(rng() % top);
    const auto a = k_box_id(dom, x, k, shifts);
    const auto b = k_box_id(dom, x, k + 1, shifts);
    for (int ax = 0; ax < d; ++ax) {
      // Direct formula: floor((id_k - tau_k) / 2), reduced modulo the coarser grid.
      const std::int64_t per = std::int64_t{1} << (top - k - 1);
      std::int64_t expect = static_cast<std::int64_t>(std::floor((a[ax] - shifts.tau[k][ax]) / 2.0));
      expect = ((expect % per) + per) % per;
      REQUIRE(b[ax] == expect);
    }
    std::vector<double> y = x;
    y[d - 1] += 64.0;
    REQUIRE(k_box_id(dom, y, k, shifts) == a);
  }
}

TEST_CASE("hierarchical examples") {
  const Domain dom(1, 2.0);
  const ColoredPointSet a(dom, {0.2, 0.7}, {Color::Red, Color::Blue});
  const auto r = hierarchical_match(a, DyadicShifts::zero(1, 1));
  REQUIRE(r.matching.pairs.size() == 1);
  CHECK(r.matching.pair_level[0] == 0);
  CHECK(a.distance(0, 1) == doctest::Approx(0.5));

  const ColoredPointSet b(dom, {0.2, 1.9, 0.7}, {Color::Red, Color::Red, Color::Blue});
  const auto r2 = hierarchical_match(b, DyadicShifts::zero(1, 1));
  CHECK(r2.matching.pairs == std::vector<Pair>{{0, 2}});
  CHECK(r2.matching.unmatched == std::vector<std::uint32_t>{1});
  REQUIRE(r2.levels.size() == 2);
  CHECK(r2.levels[0].red_left == 1);
  CHECK(r2.levels[1].red_left == 1);
}

TEST_CASE("hierarchical invariants") {
  for (int s = 0; s < 40; ++s) {
    const int d = 1 + s % 2;
    const Domain dom(d, d == 1 ? 512.0 : 32.0);
    const auto pts = two_color(dom, 100 + s);
    const auto shifts = DyadicShifts::random(d, dyadic_top_level(dom), s);
    const auto res = hierarchical_match(pts, shifts);
    const auto& m = res.matching;
    REQUIRE_NOTHROW(validate_matching(pts, m));
    InvariantOptions opt;
    opt.scheme = Scheme::Hierarchical;
    const auto rep = invariant_report(pts, m, opt);
    REQUIRE(rep.all_hard_passed());
    // Each pair lies in a common k-box of its level.
    for (std::size_t k = 0; k < m.pairs.size(); ++k)
      REQUIRE(k_box_id(dom, pts.point(m.pairs[k].a), m.pair_level[k], shifts) ==
              k_box_id(dom, pts.point(m.pairs[k].b), m.pair_level[k], shifts));
    const std::size_t r = pts.count(Color::Red), b = pts.count(Color::Blue);
    CHECK(m.unmatched.size() == (r > b ? r - b : b - r));
  }
}

TEST_CASE("hierarchical boxes use maximum-cardinality minimum-length matchings") {
  // Every box holds a min-length matching of its survivors: check level 0 directly.
  const Domain dom(2, 8.0);
  for (int s = 0; s < 20; ++s) {
    const auto pts = merge(sample_poisson(dom, 2.0, Color::Red, derive_seed(s, 7, 0)),
                           sample_poisson(dom, 2.0, Color::Blue, derive_seed(s, 7, 1)));
    const auto shifts = DyadicShifts::random(2, 3, s);
    const auto res = hierarchical_match(pts, shifts);
    std::map<std::vector<std::int64_t>, std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>> boxes;
    for (std::uint32_t i = 0; i < pts.size(); ++i) {
      auto& slot = boxes[k_box_id(dom, pts.point(i), 0, shifts)];
      (pts.color(i) == Color::Red ? slot.first : slot.second).push_back(i);
    }
    double level0 = 0, expect = 0;
    std::size_t pairs0 = 0, expect_pairs = 0;
    for (std::size_t k = 0; k < res.matching.pairs.size(); ++k)
      if (res.matching.pair_level[k] == 0) {
        level0 += pts.distance(res.matching.pairs[k].a, res.matching.pairs[k].b);
        ++pairs0;
      }
    for (const auto& [box, rb] : boxes) {
      const std::size_t n = std::min(rb.first.size(), rb.second.size());
      expect_pairs += n;
      if (n == 0) continue;
      // Brute force over injections of the smaller side.
      const auto& small = rb.first.size() <= rb.second.size() ? rb.first : rb.second;
      auto big = rb.first.size() <= rb.second.size() ? rb.second : rb.first;
      std::sort(big.begin(), big.end());
      double best = 1e300;
      do {
        double c = 0;
        for (std::size_t i = 0; i < small.size(); ++i) c += pts.distance(small[i], big[i]);
        best = std::min(best, c);
      } while (std::next_permutation(big.begin(), big.end()));
      expect += best;
    }
    CHECK(pairs0 == expect_pairs);
    CHECK(level0 == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("hierarchical surplus tracks the Poisson difference") {
  const Domain dom(1, 256.0);
  std::map<int, double> left;
  std::map<int, double> boxes;
  const int seeds = 1000;
  for (int s = 0; s < seeds; ++s) {
    const auto pts = two_color(dom, 5000 + s);
    const auto res = hierarchical_match(pts, DyadicShifts::random(1, 8, s));
    for (const auto& lv : res.levels) {
      left[lv.level] += static_cast<double>(lv.red_left);
      boxes[lv.level] += static_cast<double>(lv.boxes);
    }
  }
  for (int k : {0, 2, 4, 5}) {
    const double mean = left[k] / boxes[k];
    const double expect = brute::poisson_surplus_mean(std::ldexp(1.0, k));
    CHECK(mean == doctest::Approx(expect).epsilon(0.05));
  }
}

TEST_CASE("adjacent matching examples") {
  const Domain circle(1, 4.0);
  const ColoredPointSet pts(circle, {0, 1, 2, 3}, std::vector<Color>(4, Color::Red));
  CHECK(adjacent_match_1d(pts, false).pairs == std::vector<Pair>{{0, 1}, {2, 3}});
  CHECK(adjacent_match_1d(pts, true).pairs == std::vector<Pair>{{0, 3}, {1, 2}});
  const ColoredPointSet one(circle, {1.0}, {Color::Red});
  CHECK_THROWS(adjacent_match_1d(one, false));
  CHECK_THROWS(adjacent_match_1d(sample_binomial(Domain(2, 4.0), 4, Color::Red, 1), false));
}

TEST_CASE("adjacent pairs have no point between partners") {
  for (int s = 0; s < 100; ++s) {
    const Domain circle(1, 200.0);
    const auto pts = sample_poisson(circle, 1.0, Color::Red, s);
    const auto m = adjacent_match_1d(pts, s % 2);
    REQUIRE_NOTHROW(validate_matching(pts, m));
    CHECK(m.unmatched.size() == pts.size() % 2);
    for (const Pair& p : m.pairs) {
      double a = pts.point(p.a)[0], b = pts.point(p.b)[0];
      if (a > b) std::swap(a, b);
      std::size_t inside = 0, outside = 0;
      for (std::uint32_t i = 0; i < pts.size(); ++i) {
        if (i == p.a || i == p.b) continue;
        const double x = pts.point(i)[0];
        ++(x > a && x < b ? inside : outside);
      }
      REQUIRE((inside == 0 || outside == 0));
    }
  }
}

TEST_CASE("spanning forest examples") {
  const ColoredPointSet pts(Domain(1, 10.0, Boundary::Box), {0, 1, 3}, std::vector<Color>(3, Color::Red));
  const auto f = minimal_spanning_forest(pts);
  CHECK(forest_length(pts, f) == doctest::Approx(3.0));
  std::set<Pair> edges;
  for (std::uint32_t v = 0; v < 3; ++v)
    if (f.parent[v] >= 0) edges.insert(Pair::of(v, static_cast<std::uint32_t>(f.parent[v])));
  CHECK(edges == std::set<Pair>{{0, 1}, {1, 2}});
  // Rooted at the smaller endpoint of the longest edge {1, 2}.
  CHECK(f.roots == std::vector<std::uint32_t>{1});
  CHECK_THROWS(minimal_spanning_forest(ColoredPointSet(Domain(2, 1.0))));
}

TEST_CASE("spanning forest matches Prim") {
  for (int s = 0; s < 200; ++s) {
    const Domain dom(2, 4.0 + s % 9, s % 2 ? Boundary::Box : Boundary::Torus);
    auto pts = sample_poisson(dom, 2.5, Color::Red, derive_seed(s, 8, 0));
    if (pts.size() > 300) pts = sample_binomial(dom, 300, Color::Red, s);
    if (pts.size() < 2) continue;
    const auto f = minimal_spanning_forest(pts);
    REQUIRE(f.roots.size() == 1);
    REQUIRE(forest_length(pts, f) == doctest::Approx(brute::prim_length(pts)).epsilon(1e-12));
  }
}

TEST_CASE("spanning forest cycle property") {
  const Domain dom(2, 12.0);
  const auto pts = sample_poisson(dom, 1.0, Color::Red, 3);
  const auto f = minimal_spanning_forest(pts);
  // Path between u and v through the tree: climb to the common ancestor.
  auto path_max = [&](std::uint32_t u, std::uint32_t v) {
    std::map<std::uint32_t, double> up;
    double acc = 0;
    for (std::int64_t x = u; x >= 0; x = f.parent[x]) {
      up[static_cast<std::uint32_t>(x)] = acc;
      if (f.parent[x] >= 0) acc = std::max(acc, pts.distance(x, f.parent[x]));
    }
    double acc2 = 0;
    for (std::int64_t x = v; x >= 0; x = f.parent[x]) {
      auto it = up.find(static_cast<std::uint32_t>(x));
      if (it != up.end()) return std::max(acc2, it->second);
      acc2 = std::max(acc2, pts.distance(x, f.parent[x]));
    }
    return 1e300;
  };
  Rng rng(1);
  int checked = 0;
  while (checked < 1000) {
    const auto u = static_cast<std::uint32_t>(rng() % pts.size());
    const auto v = static_cast<std::uint32_t>(rng() % pts.size());
    if (u == v || f.parent[u] == std::int64_t{v} || f.parent[v] == std::int64_t{u}) continue;
    REQUIRE(path_max(u, v) < pts.distance(u, v));
    ++checked;
  }
}

TEST_CASE("cone test and cone forest examples") {
  const double o[] = {0, 0}, e1[] = {1, 0}, far[] = {1, 2};
  CHECK(in_forward_cone(o, e1));
  CHECK_FALSE(in_forward_cone(o, far));
  CHECK_FALSE(in_forward_cone(e1, o));
  const ColoredPointSet pts(Domain(2, 5.0, Boundary::Box), {0, 0, 1, 0}, {Color::Red, Color::Red});
  const auto f = cone_forest(pts);
  CHECK(f.parent[0] == 1);
  CHECK(f.parent[1] == -1);
  CHECK_THROWS(cone_forest(sample_binomial(Domain(2, 5.0), 5, Color::Red, 1)));
}

TEST_CASE("cone forest is a forest with brute-force parents") {
  for (int s = 0; s < 100; ++s) {
    const int d = 2 + s % 2;
    const Domain dom(d, d == 2 ? 31.6 : 10.0, Boundary::Box);
    const auto pts = sample_poisson(dom, 1.0, Color::Red, derive_seed(s, 9, 0));
    const auto f = cone_forest(pts);
    for (std::uint32_t x = 0; x < pts.size(); ++x) {
      std::int64_t best = -1;
      for (std::uint32_t z = 0; z < pts.size(); ++z) {
        if (z == x || !in_forward_cone(pts.point(x), pts.point(z))) continue;
        if (best < 0 || pts.point(z)[0] < pts.point(best)[0] ||
            (pts.point(z)[0] == pts.point(best)[0] && z < best))
          best = z;
      }
      REQUIRE(f.parent[x] == best);
    }
    // Parents strictly increase the first coordinate, so there are no cycles.
    for (std::uint32_t x = 0; x < pts.size(); ++x)
      if (f.parent[x] >= 0) REQUIRE(pts.point(f.parent[x])[0] > pts.point(x)[0]);
  }
}

TEST_CASE("cone forest interior in-degree averages one") {
  const Domain dom(2, 120.0, Boundary::Box);
  double indeg = 0, count = 0;
  for (int s = 0; s < 4; ++s) {
    const auto pts = sample_poisson(dom, 1.0, Color::Red, derive_seed(s, 10, 0));
    const auto f = cone_forest(pts);
    for (std::uint32_t x = 0; x < pts.size(); ++x) {
      if (pts.domain().distance_to_boundary(pts.point(x)) < 20) continue;
      indeg += static_cast<double>(f.children[x].size());
      count += 1;
    }
  }
  CHECK(indeg / count == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("matching from forest examples") {
  const ColoredPointSet pts(Domain(1, 10.0, Boundary::Box), {5, 1, 2, 3}, std::vector<Color>(4, Color::Red));
  // Star rooted at 0 with children ordered by distance: 3 (d=2), 2 (d=3), 1 (d=4).
  const auto star = Forest::from_parents(pts, {-1, 0, 0, 0});
  CHECK(star.children[0] == std::vector<std::uint32_t>{3, 2, 1});
  const auto m = match_from_forest(star);
  CHECK(m.pairs == std::vector<Pair>{{0, 1}, {2, 3}});
  CHECK(m.unmatched.empty());

  const ColoredPointSet path(Domain(1, 10.0, Boundary::Box), {0, 1, 2}, std::vector<Color>(3, Color::Red));
  const auto f = Forest::from_parents(path, {1, 2, -1});
  const auto m2 = match_from_forest(f);
  CHECK(m2.pairs == std::vector<Pair>{{0, 1}});
  CHECK(m2.unmatched == std::vector<std::uint32_t>{2});
  CHECK_THROWS(Forest::from_parents(path, {1, 0, -1}));

  const ColoredPointSet four(Domain(1, 10.0, Boundary::Box), {0, 1, 2, 3}, std::vector<Color>(4, Color::Red));
  const auto m3 = match_from_forest(Forest::from_parents(four, {1, 2, 3, -1}));
  CHECK(m3.pairs == std::vector<Pair>{{0, 1}, {2, 3}});
  CHECK(m3.unmatched.empty());
}

TEST_CASE("forest matchings pair vertices within forest distance two") {
  for (int s = 0; s < 60; ++s) {
    const bool cone = s % 2;
    const Domain dom(cone ? 3 : 2, cone ? 9.0 : 25.0, cone ? Boundary::Box : Boundary::Torus);
    const auto pts = sample_poisson(dom, 1.0, Color::Red, derive_seed(s, 11, 0));
    if (pts.size() < 2) continue;
    const auto f = cone ? cone_forest(pts) : minimal_spanning_forest(pts);
    const auto m = match_from_forest(f);
    REQUIRE_NOTHROW(validate_matching(pts, m));
    for (const Pair& p : m.pairs) REQUIRE(forest_distance_capped(f, p.a, p.b) <= 2);
    std::set<std::uint32_t> roots(f.roots.begin(), f.roots.end());
    for (auto u : m.unmatched) REQUIRE(roots.count(u));
    std::ostringstream out;
    write_forest_csv(out, f);
    CHECK(out.str().rfind("child,parent\n", 0) == 0);
  }
}
