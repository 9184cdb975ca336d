#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pointmatch/geometry.hpp"
#include "pointmatch/random.hpp"

using namespace pm;

TEST_CASE("domain validation") {
  CHECK_THROWS_AS(Domain(2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Domain(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Domain(2, -3.0), std::invalid_argument);
  CHECK(Domain(3, 2.0).volume() == doctest::Approx(8.0));
}

TEST_CASE("distance examples") {
  const Domain line(1, 10.0);
  const double a[] = {0.5}, b[] = {9.5};
  CHECK(distance(line, a, b) == doctest::Approx(1.0));
  const Domain box(2, 10.0, Boundary::Box);
  const double o[] = {0, 0}, p[] = {3, 4};
  CHECK(distance(box, o, p) == 5.0);
  CHECK(distance(box, o, o) == 0.0);
}

TEST_CASE("torus metric bounded and shift invariant") {
  Rng rng(7);
  const Domain dom(3, 5.0);
  for (int it = 0; it < 10000; ++it) {
    double x[3], y[3], ys[3];
    for (int a = 0; a < 3; ++a) {
      x[a] = 5.0 * uniform01(rng);
      y[a] = 5.0 * uniform01(rng);
    }
    const double d = distance(dom, x, y);
    CHECK(d <= 5.0 * std::sqrt(3.0) / 2 + 1e-12);
    CHECK(d == doctest::Approx(distance(dom, y, x)));
    // Adding any lattice shift to one argument leaves the distance unchanged.
    for (int a = 0; a < 3; ++a) ys[a] = y[a] + 5.0 * static_cast<int>(rng() % 5) - 10.0;
    double acc = 0;
    for (int a = 0; a < 3; ++a) {
      double delta = std::fmod(std::abs(x[a] - ys[a]), 5.0);
      delta = std::min(delta, 5.0 - delta);
      acc += delta * delta;
    }
    CHECK(std::sqrt(acc) == doctest::Approx(d).epsilon(1e-12));
  }
}

TEST_CASE("triangle inequality on random triples") {
  Rng rng(11);
  for (Boundary b : {Boundary::Torus, Boundary::Box}) {
    const Domain dom(2, 3.0, b);
    for (int it = 0; it < 100000; ++it) {
      double x[2], y[2], z[2];
      for (int a = 0; a < 2; ++a) {
        x[a] = 3 * uniform01(rng);
        y[a] = 3 * uniform01(rng);
        z[a] = 3 * uniform01(rng);
      }
      REQUIRE(distance(dom, x, z) <= distance(dom, x, y) + distance(dom, y, z) + 1e-12);
    }
  }
}

TEST_CASE("poisson sampling") {
  const Domain dom(1, 10.0);
  double mean = 0;
  for (int s = 0; s < 2000; ++s) mean += static_cast<double>(sample_poisson(dom, 1.0, Color::Red, s).size());
  mean /= 2000;
  CHECK(mean == doctest::Approx(10.0).epsilon(0.03));
  CHECK_THROWS(sample_poisson(dom, 0.0, Color::Red, 1));
  CHECK_THROWS(sample_poisson(dom, -1.0, Color::Red, 1));

  const auto a = sample_poisson(Domain(2, 4.0), 2.0, Color::Blue, 99);
  const auto b = sample_poisson(Domain(2, 4.0), 2.0, Color::Blue, 99);
  CHECK(a.coords() == b.coords());
  for (double c : a.coords()) CHECK((c >= 0 && c < 4.0));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.color(i) == Color::Blue);
}

TEST_CASE("poisson count variance equals its mean") {
  const Domain dom(2, 32.0);
  const int seeds = 10000;
  double s1 = 0, s2 = 0;
  for (int s = 0; s < seeds; ++s) {
    const double n = static_cast<double>(sample_poisson(dom, 1.0, Color::Red, derive_seed(3, 0, s)).size());
    s1 += n;
    s2 += n * n;
  }
  const double mean = s1 / seeds;
  const double var = (s2 - seeds * mean * mean) / (seeds - 1);
  CHECK(mean == doctest::Approx(1024.0).epsilon(0.01));
  CHECK(var == doctest::Approx(1024.0).epsilon(0.05));
}

TEST_CASE("binomial sampling") {
  const Domain dom(2, std::sqrt(2000.0));
  CHECK(sample_binomial(dom, 0, Color::Red, 1).empty());
  CHECK(sample_binomial(dom, 2000, Color::Red, 1).size() == 2000);
  CHECK(sample_binomial(dom, 5, Color::Red, 42).coords() == sample_binomial(dom, 5, Color::Red, 42).coords());
  CHECK(sample_binomial(dom, 5, Color::Red, 42).coords() != sample_binomial(dom, 5, Color::Red, 43).coords());
}

TEST_CASE("palm point") {
  const Domain dom(2, 10.0);
  const double origin[] = {0.0, 0.0};
  const ColoredPointSet empty(dom);
  const auto one = add_palm_point(empty, origin, Color::Red);
  CHECK(one.size() == 1);
  const auto base = sample_binomial(dom, 100, Color::Red, 5);
  const auto more = add_palm_point(base, origin, Color::Red);
  REQUIRE(more.size() == 101);
  for (std::size_t i = 0; i < 200; ++i) CHECK(more.coords()[i] == base.coords()[i]);
  const double outside[] = {10.0, 1.0};
  CHECK_THROWS(add_palm_point(base, outside, Color::Red));
}

TEST_CASE("general position") {
  const Domain dom(2, 4.0, Boundary::Box);
  const ColoredPointSet square(dom, {0, 0, 1, 0, 1, 1, 0, 1}, {Color::Red, Color::Red, Color::Red, Color::Red});
  const auto rep = check_general_position(square);
  CHECK_FALSE(rep.ok);
  REQUIRE(rep.witness.has_value());
  const auto& w = *rep.witness;
  CHECK(square.distance(w[0], w[1]) == square.distance(w[2], w[3]));

  const auto three = sample_binomial(dom, 3, Color::Red, 8);
  CHECK(check_general_position(three).ok);

  std::size_t collisions = 0;
  for (int s = 0; s < 3; ++s) {
    const auto big = sample_binomial(Domain(2, 30.0), 1000, Color::Red, 100 + s);
    CHECK(check_general_position(big).ok);
    collisions += check_general_position(big, 1e-12).ok ? 0 : 1;
  }
  MESSAGE("instances with distance coincidences at tolerance 1e-12: " << collisions << "/3");
}

TEST_CASE("points csv round trip") {
  const auto pts = merge(sample_binomial(Domain(3, 2.0, Boundary::Box), 7, Color::Red, 1),
                         sample_binomial(Domain(3, 2.0, Boundary::Box), 4, Color::Blue, 2));
  std::stringstream ss;
  write_points_csv(ss, pts);
  CHECK(ss.str().rfind("# seed=", 0) == 0);
  const auto back = read_points_csv(ss);
  CHECK(back.domain() == pts.domain());
  CHECK(back.coords() == pts.coords());
  CHECK(back.colors() == pts.colors());
}

TEST_CASE("seed derivation is counter based") {
  CHECK(derive_seed(1, 0, 5) == derive_seed(1, 0, 5));
  CHECK(derive_seed(1, 0, 5) != derive_seed(1, 0, 6));
  CHECK(derive_seed(1, 0, 5) != derive_seed(1, 1, 5));
  CHECK(derive_seed(1, 0, 5) != derive_seed(2, 0, 5));
}
