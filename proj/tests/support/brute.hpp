#pragma once

// Slow, obviously-correct reference computations used by the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "pointmatch/geometry.hpp"
#include "pointmatch/matching.hpp"

namespace brute {

inline std::int64_t nearest(const pm::ColoredPointSet& pts, std::span<const double> q,
                            std::int64_t skip = -1) {
  std::int64_t best = -1;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (static_cast<std::int64_t>(j) == skip) continue;
    const double d2 = pts.domain().distance2(q, pts.point(j));
    if (d2 < bd) {
      bd = d2;
      best = static_cast<std::int64_t>(j);
    }
  }
  return best;
}

inline double prim_length(const pm::ColoredPointSet& pts) {
  const std::size_t n = pts.size();
  if (n < 2) return 0;
  std::vector<double> key(n, std::numeric_limits<double>::infinity());
  std::vector<char> in(n, 0);
  key[0] = 0;
  double total = 0;
  for (std::size_t it = 0; it < n; ++it) {
    std::size_t u = n;
    for (std::size_t v = 0; v < n; ++v)
      if (!in[v] && (u == n || key[v] < key[u])) u = v;
    in[u] = 1;
    total += key[u];
    for (std::size_t v = 0; v < n; ++v)
      if (!in[v]) key[v] = std::min(key[v], pts.distance(u, v));
  }
  return total;
}

/// Minimum over all n! assignments, summed in row order.
inline double assignment_by_permutations(const std::vector<double>& cost, std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double v = 0;
    for (std::size_t i = 0; i < n; ++i) v += cost[i * n + perm[i]];
    best = std::min(best, v);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Minimum perfect matching over all (n-1)!! matchings. Returns the pairs.
inline std::vector<pm::Pair> perfect_matching_by_enumeration(const pm::ColoredPointSet& pts) {
  const std::size_t n = pts.size();
  std::vector<pm::Pair> best, cur;
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<char> used(n, 0);
  auto rec = [&](auto&& self, double cost) -> void {
    std::size_t i = 0;
    while (i < n && used[i]) ++i;
    if (i == n) {
      if (cost < best_cost) best_cost = cost, best = cur;
      return;
    }
    used[i] = 1;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (used[j]) continue;
      used[j] = 1;
      cur.push_back(pm::Pair::of(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)));
      self(self, cost + pts.distance(i, j));
      cur.pop_back();
      used[j] = 0;
    }
    used[i] = 0;
  };
  rec(rec, 0.0);
  std::sort(best.begin(), best.end());
  return best;
}

inline std::size_t double_factorial(std::size_t n) {
  std::size_t v = 1;
  for (std::size_t k = n; k > 1; k -= 2) v *= k;
  return v;
}

/// E (R - B)^+ for independent R, B ~ Poisson(mu), by direct double summation.
inline double poisson_surplus_mean(double mu) {
  const double sd = std::sqrt(mu);
  const auto hi = static_cast<std::size_t>(mu + 12 * sd + 20);
  const auto lo = static_cast<std::size_t>(std::max(0.0, mu - 12 * sd - 20));
  std::vector<double> p(hi + 1, 0.0);
  for (std::size_t k = lo; k <= hi; ++k)
    p[k] = std::exp(-mu + static_cast<double>(k) * std::log(mu) - std::lgamma(static_cast<double>(k) + 1));
  double total = 0;
  for (std::size_t r = lo; r <= hi; ++r)
    for (std::size_t b = lo; b < r; ++b) total += static_cast<double>(r - b) * p[r] * p[b];
  return total;
}

/// Samples with survival (r / r0)^(-alpha) for r >= r0, by inverse transform.
inline std::vector<double> pareto_samples(double alpha, double r0, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& x : out) x = r0 * std::pow(1.0 - u(rng), -1.0 / alpha);
  return out;
}

inline std::vector<double> exponential_samples(double rate, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> e(rate);
  std::vector<double> out(n);
  for (auto& x : out) x = e(rng);
  return out;
}

}  // namespace brute
