#include "pointmatch/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace pm {

std::vector<std::uint32_t> solve_assignment(std::span<const double> cost, std::size_t rows,
                                            std::size_t cols) {
  if (rows > cols) throw std::invalid_argument("solve_assignment: rows must not exceed cols");
  if (cost.size() != rows * cols) throw std::invalid_argument("solve_assignment: bad matrix size");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is a virtual source.
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0), minv(cols + 1);
  std::vector<std::size_t> owner(cols + 1, 0), way(cols + 1, 0);
  std::vector<char> used(cols + 1);
  auto a = [&](std::size_t i, std::size_t j) { return cost[(i - 1) * cols + (j - 1)]; };
  for (std::size_t i = 1; i <= rows; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = owner[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = a(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::uint32_t> assignment(rows, 0);
  for (std::size_t j = 1; j <= cols; ++j)
    if (owner[j] != 0) assignment[owner[j] - 1] = static_cast<std::uint32_t>(j - 1);
  return assignment;
}

namespace {

Matching build_two_color(const ColoredPointSet& points, std::vector<Pair> pairs) {
  Matching m;
  m.mode = MatchMode::TwoColor;
  std::vector<char> used(points.size(), 0);
  for (const Pair& p : pairs) used[p.a] = used[p.b] = 1;
  m.pairs = std::move(pairs);
  for (std::uint32_t i = 0; i < points.size(); ++i)
    if (!used[i]) m.unmatched.push_back(i);
  m.normalize();
  return m;
}

}  // namespace

std::vector<Pair> min_length_bipartite_pairs(const ColoredPointSet& points,
                                             std::span<const std::uint32_t> red,
                                             std::span<const std::uint32_t> blue) {
  const bool red_rows = red.size() <= blue.size();
  const auto rows = red_rows ? red : blue;
  const auto cols = red_rows ? blue : red;
  std::vector<Pair> pairs;
  if (rows.empty()) return pairs;
  std::vector<double> cost(rows.size() * cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      cost[i * cols.size() + j] = points.distance(rows[i], cols[j]);
  const auto assignment = solve_assignment(cost, rows.size(), cols.size());
  pairs.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) pairs.push_back(Pair::of(rows[i], cols[assignment[i]]));
  return pairs;
}

Matching min_length_bipartite(const ColoredPointSet& points, std::span<const std::uint32_t> red,
                              std::span<const std::uint32_t> blue) {
  Matching m;
  m.mode = MatchMode::TwoColor;
  m.pairs = min_length_bipartite_pairs(points, red, blue);
  std::vector<char> used(points.size(), 0);
  for (const Pair& p : m.pairs) used[p.a] = used[p.b] = 1;
  for (auto i : red)
    if (!used[i]) m.unmatched.push_back(i);
  for (auto i : blue)
    if (!used[i]) m.unmatched.push_back(i);
  m.normalize();
  return m;
}

Matching min_length_bipartite(const ColoredPointSet& points) {
  const auto red = points.indices_of(Color::Red);
  const auto blue = points.indices_of(Color::Blue);
  return min_length_bipartite(points, red, blue);
}

Matching min_length_one_color_exact(const ColoredPointSet& points) {
  const std::size_t n = points.size();
  if (n % 2 != 0)
    throw CapabilityError("exact one-color matching needs an even point count (got " +
                          std::to_string(n) + "); use min_length_one_color_greedy");
  if (n > kExactOneColorMax)
    throw CapabilityError("exact one-color matching is limited to n <= 20 (got " + std::to_string(n) +
                          "); use min_length_one_color_greedy");
  Matching m;
  m.mode = MatchMode::OneColor;
  if (n == 0) return m;
  const std::uint32_t full = (1u << n) - 1;
  std::vector<double> dist(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dist[i * n + j] = points.distance(i, j);
  // togo[mask]: cheapest way to match the points outside mask.
  std::vector<double> togo(std::size_t{1} << n, std::numeric_limits<double>::infinity());
  std::vector<std::uint8_t> choice(std::size_t{1} << n, 0);
  togo[full] = 0;
  for (std::uint32_t mask = full; mask-- > 0;) {
    if (std::popcount(mask) % 2 != 0) continue;
    const int i = std::countr_one(mask);
    for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j) {
      if (mask & (1u << j)) continue;
      const double c = dist[static_cast<std::size_t>(i) * n + j] + togo[mask | (1u << i) | (1u << j)];
      if (c < togo[mask]) {
        togo[mask] = c;
        choice[mask] = static_cast<std::uint8_t>(j);
      }
    }
  }
  for (std::uint32_t mask = 0; mask != full;) {
    const auto i = static_cast<std::uint32_t>(std::countr_one(mask));
    const std::uint32_t j = choice[mask];
    m.pairs.push_back(Pair::of(i, j));
    mask |= (1u << i) | (1u << j);
  }
  m.normalize();
  return m;
}

Matching min_length_one_color_greedy(const ColoredPointSet& points) {
  struct Edge {
    double d2;
    std::uint32_t a, b;
  };
  const std::size_t n = points.size();
  std::vector<Edge> edges;
  edges.reserve(n * (n > 0 ? n - 1 : 0) / 2);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j) edges.push_back({points.distance2(i, j), i, j});
  std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
    if (x.d2 != y.d2) return x.d2 < y.d2;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  Matching m;
  m.mode = MatchMode::OneColor;
  m.approximate = true;
  std::vector<char> used(n, 0);
  for (const Edge& e : edges) {
    if (used[e.a] || used[e.b]) continue;
    used[e.a] = used[e.b] = 1;
    m.pairs.push_back({e.a, e.b});
  }
  for (std::uint32_t i = 0; i < n; ++i)
    if (!used[i]) m.unmatched.push_back(i);
  m.normalize();
  return m;
}

std::size_t refine_two_opt(const ColoredPointSet& points, Matching& m, int max_passes) {
  std::size_t swaps = 0;
  auto d = [&](std::uint32_t x, std::uint32_t y) { return points.distance(x, y); };
  const bool two_color = m.mode == MatchMode::TwoColor;
  for (int pass = 0; pass < max_passes; ++pass) {
    bool improved = false;
    for (std::size_t p = 0; p < m.pairs.size(); ++p) {
      for (std::size_t q = p + 1; q < m.pairs.size(); ++q) {
        auto& [a, b] = m.pairs[p];
        auto& [c, e] = m.pairs[q];
        const double now = d(a, b) + d(c, e);
        // In two-color mode a swap must keep every pair red/blue.
        const bool ac_ok = !two_color || points.color(a) != points.color(c);
        const bool ae_ok = !two_color || points.color(a) != points.color(e);
        const double alt1 = ac_ok ? d(a, c) + d(b, e) : now;
        const double alt2 = ae_ok ? d(a, e) + d(b, c) : now;
        if (alt1 < now - 1e-12 && alt1 <= alt2) {
          const auto na = Pair::of(a, c), nb = Pair::of(b, e);
          m.pairs[p] = na;
          m.pairs[q] = nb;
        } else if (alt2 < now - 1e-12) {
          const auto na = Pair::of(a, e), nb = Pair::of(b, c);
          m.pairs[p] = na;
          m.pairs[q] = nb;
        } else {
          continue;
        }
        ++swaps;
        improved = true;
      }
    }
    if (!improved) break;
  }
  m.round_matched.clear();
  m.normalize();
  return swaps;
}

namespace {

template <class Visit>
void for_each_perfect_bipartite(const ColoredPointSet& points, Visit&& visit) {
  const auto red = points.indices_of(Color::Red);
  auto blue = points.indices_of(Color::Blue);
  if (red.size() != blue.size())
    throw std::invalid_argument("brute-force stable matching needs |red| == |blue|");
  if (red.size() > kBruteForceStableMax)
    throw CapabilityError("brute-force stable matching is limited to 8 + 8 points");
  std::sort(blue.begin(), blue.end());
  do {
    std::vector<Pair> pairs;
    for (std::size_t k = 0; k < red.size(); ++k) pairs.push_back(Pair::of(red[k], blue[k]));
    visit(build_two_color(points, std::move(pairs)));
  } while (std::next_permutation(blue.begin(), blue.end()));
}

}  // namespace

std::size_t count_stable_perfect_matchings(const ColoredPointSet& points, Strictness rule) {
  std::size_t count = 0;
  for_each_perfect_bipartite(points, [&](const Matching& m) {
    if (!find_unstable_pair(points, m, rule)) ++count;
  });
  return count;
}

Matching brute_force_stable(const ColoredPointSet& points, Strictness rule) {
  std::size_t count = 0;
  Matching found;
  for_each_perfect_bipartite(points, [&](const Matching& m) {
    if (!find_unstable_pair(points, m, rule)) {
      if (count++ == 0) found = m;
    }
  });
  if (count != 1)
    throw std::logic_error("brute_force_stable: expected exactly one stable perfect matching, found " +
                           std::to_string(count));
  return found;
}

}  // namespace pm
