#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "pointmatch/constructions.hpp"
#include "pointmatch/experiment.hpp"
#include "pointmatch/oracles.hpp"
#include "pointmatch/random.hpp"
#include "pointmatch/spatial_index.hpp"
#include "pointmatch/stable.hpp"

namespace pm {

namespace {

using Check = OracleCheck;

Check stable_vs_enumeration(const OracleOptions& opt) {
  Check c{"stable_match_vs_brute_force", true, ""};
  const Domain dom(2, 1.0);
  int checked = 0;
  for (int s = 0; s < opt.seeds && c.passed; ++s) {
    const std::size_t k = 1 + static_cast<std::size_t>(s) % 8;
    const auto pts = merge(sample_binomial(dom, k, Color::Red, derive_seed(501, s, 0)),
                           sample_binomial(dom, k, Color::Blue, derive_seed(501, s, 1)));
    Matching fast = stable_match(pts, MatchMode::TwoColor);
    const std::size_t count = count_stable_perfect_matchings(pts, opt.rule);
    if (count != 1) {
      c.passed = false;
      c.detail = "seed " + std::to_string(s) + ": " + std::to_string(count) + " stable matchings";
      break;
    }
    Matching slow = brute_force_stable(pts, opt.rule);
    if (slow.pairs != fast.pairs) {
      c.passed = false;
      c.detail = "seed " + std::to_string(s) + ": stable_match differs from enumeration";
    }
    ++checked;
  }
  // Equidistant configuration on a line: R B R B at unit spacing. The
  // tie-broken output must be stable under the verifier's rule.
  if (c.passed) {
    const Domain line(1, 4.0, Boundary::Box);
    const ColoredPointSet tie(line, {0.5, 1.5, 2.5, 3.5}, {Color::Red, Color::Blue, Color::Red, Color::Blue});
    const Matching m = stable_match(tie, MatchMode::TwoColor);
    if (find_unstable_pair(tie, m, opt.rule)) {
      c.passed = false;
      c.detail = "equidistant RBRB instance: stable_match output judged unstable";
    } else if (count_stable_perfect_matchings(tie, opt.rule) == 0) {
      c.passed = false;
      c.detail = "equidistant RBRB instance: enumeration finds no stable matching";
    }
  }
  if (c.passed) c.detail = std::to_string(checked) + " instances + equidistant case";
  return c;
}

Check assignment_vs_permutations(int seeds) {
  Check c{"assignment_vs_permutations", true, ""};
  const Domain dom(2, 1.0);
  for (int s = 0; s < seeds && c.passed; ++s) {
    const std::size_t n = 1 + static_cast<std::size_t>(s) % 7;
    const auto pts = merge(sample_binomial(dom, n, Color::Red, derive_seed(502, s, 0)),
                           sample_binomial(dom, n, Color::Blue, derive_seed(502, s, 1)));
    const auto red = pts.indices_of(Color::Red), blue = pts.indices_of(Color::Blue);
    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = pts.distance(red[i], blue[j]);
    const auto a = solve_assignment(cost, n, n);
    double fast = 0;
    for (std::size_t i = 0; i < n; ++i) fast += cost[i * n + a[i]];
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double v = 0;
      for (std::size_t i = 0; i < n; ++i) v += cost[i * n + perm[i]];
      best = std::min(best, v);
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (fast != best) {
      c.passed = false;
      c.detail = "seed " + std::to_string(s) + ": assignment cost " + std::to_string(fast) + " vs " +
                 std::to_string(best);
    }
  }
  return c;
}

double best_perfect(const std::vector<double>& dist, std::size_t n, std::uint32_t used) {
  if (used == (1u << n) - 1) return 0;
  std::size_t i = 0;
  while (used & (1u << i)) ++i;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = i + 1; j < n; ++j) {
    if (used & (1u << j)) continue;
    best = std::min(best, dist[i * n + j] + best_perfect(dist, n, used | (1u << i) | (1u << j)));
  }
  return best;
}

Check subset_dp_vs_enumeration(int seeds) {
  Check c{"subset_dp_vs_enumeration", true, ""};
  const Domain dom(2, 1.0);
  for (int s = 0; s < seeds && c.passed; ++s) {
    const std::size_t n = 2 + 2 * (static_cast<std::size_t>(s) % 5);
    const auto pts = sample_binomial(dom, n, Color::Red, derive_seed(503, s, 0));
    std::vector<double> dist(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) dist[i * n + j] = pts.distance(i, j);
    const double slow = best_perfect(dist, n, 0);
    const Matching m = min_length_one_color_exact(pts);
    // Same summation order as the enumeration: pairs in order of their smaller index.
    double fast = 0;
    for (const Pair& p : m.pairs) fast += dist[p.a * n + p.b];
    if (std::abs(fast - slow) > 1e-12 * std::max(1.0, slow)) {
      c.passed = false;
      c.detail = "seed " + std::to_string(s) + ": dp " + std::to_string(fast) + " vs " + std::to_string(slow);
    }
  }
  return c;
}

Check grid_vs_scan(int seeds) {
  Check c{"grid_nearest_vs_scan", true, ""};
  for (int s = 0; s < seeds && c.passed; ++s) {
    const int d = 1 + s % 3;
    const Boundary b = s % 2 ? Boundary::Box : Boundary::Torus;
    const Domain dom(d, 8.0, b);
    const auto pts = sample_poisson(dom, 1.5, Color::Red, derive_seed(504, s, 0));
    if (pts.size() < 2) continue;
    const SpatialIndex index(pts, SpatialIndex::default_cell_size(dom, pts.size()));
    for (std::uint32_t q = 0; q < pts.size(); ++q) {
      const auto got = index.nearest(pts.point(q), [&](std::uint32_t j) { return j != q; });
      std::uint32_t best = q;
      double bd = std::numeric_limits<double>::infinity();
      for (std::uint32_t j = 0; j < pts.size(); ++j) {
        if (j == q) continue;
        const double d2 = pts.distance2(q, j);
        if (d2 < bd) bd = d2, best = j;
      }
      if (!got || got->index != best) {
        c.passed = false;
        c.detail = "seed " + std::to_string(s) + " query " + std::to_string(q);
        break;
      }
    }
  }
  return c;
}

Check msf_vs_prim(int seeds) {
  Check c{"msf_vs_prim", true, ""};
  for (int s = 0; s < seeds && c.passed; ++s) {
    const Domain dom(2, 6.0, s % 2 ? Boundary::Box : Boundary::Torus);
    const auto pts = sample_poisson(dom, 2.0, Color::Red, derive_seed(505, s, 0));
    const std::size_t n = pts.size();
    if (n < 2) continue;
    std::vector<double> key(n, std::numeric_limits<double>::infinity());
    std::vector<char> in(n, 0);
    key[0] = 0;
    double prim = 0;
    for (std::size_t it = 0; it < n; ++it) {
      std::size_t u = n;
      for (std::size_t v = 0; v < n; ++v)
        if (!in[v] && (u == n || key[v] < key[u])) u = v;
      in[u] = 1;
      prim += key[u];
      for (std::size_t v = 0; v < n; ++v)
        if (!in[v]) key[v] = std::min(key[v], pts.distance(u, v));
    }
    const double fast = forest_length(pts, minimal_spanning_forest(pts));
    if (std::abs(fast - prim) > 1e-9 * std::max(1.0, prim)) {
      c.passed = false;
      c.detail = "seed " + std::to_string(s) + ": " + std::to_string(fast) + " vs " + std::to_string(prim);
    }
  }
  return c;
}

Check timeline_vs_stable(int seeds) {
  Check c{"ball_growing_vs_stable", true, ""};
  for (int s = 0; s < seeds && c.passed; ++s) {
    const MatchMode mode = s % 2 ? MatchMode::OneColor : MatchMode::TwoColor;
    const Domain dom(1 + s % 2, 10.0);
    auto pts = sample_poisson(dom, 1.0, Color::Red, derive_seed(506, s, 0));
    if (mode == MatchMode::TwoColor) pts = merge(pts, sample_poisson(dom, 1.0, Color::Blue, derive_seed(506, s, 1)));
    const auto events = match_radii_timeline(pts, mode);
    std::vector<Pair> slow;
    for (const auto& e : events) slow.push_back(e.pair);
    std::sort(slow.begin(), slow.end());
    if (slow != stable_match(pts, mode).pairs) {
      c.passed = false;
      c.detail = "seed " + std::to_string(s);
    }
  }
  return c;
}

Check indexed_vs_quadratic(int seeds, Strictness rule) {
  Check c{"indexed_stability_check_vs_scan", true, ""};
  for (int s = 0; s < seeds && c.passed; ++s) {
    const Domain dom(2, 10.0);
    const auto pts = merge(sample_poisson(dom, 1.0, Color::Red, derive_seed(507, s, 0)),
                           sample_poisson(dom, 1.0, Color::Blue, derive_seed(507, s, 1)));
    Matching m = stable_match(pts, MatchMode::TwoColor);
    if (s % 2 && m.pairs.size() >= 2) {
      // Swap partners of two pairs to corrupt the matching.
      Rng rng(derive_seed(507, s, 2));
      const std::size_t p = rng() % m.pairs.size();
      std::size_t q = rng() % (m.pairs.size() - 1);
      if (q >= p) ++q;
      auto red_of = [&](const Pair& x) { return pts.color(x.a) == Color::Red ? x.a : x.b; };
      auto blue_of = [&](const Pair& x) { return pts.color(x.a) == Color::Red ? x.b : x.a; };
      const Pair np = Pair::of(red_of(m.pairs[p]), blue_of(m.pairs[q]));
      const Pair nq = Pair::of(red_of(m.pairs[q]), blue_of(m.pairs[p]));
      m.pairs[p] = np;
      m.pairs[q] = nq;
      m.round_matched.clear();
      m.normalize();
    }
    const bool slow = find_unstable_pair(pts, m, rule).has_value();
    const bool fast = find_unstable_pair_indexed(pts, m).has_value();
    if (slow != fast) {
      c.passed = false;
      c.detail = "seed " + std::to_string(s) + (slow ? ": scan found a pair, index did not" : ": index only");
    }
  }
  return c;
}

Check hierarchical_surplus(int seeds) {
  Check c{"hierarchical_surplus_counts", true, ""};
  for (int s = 0; s < seeds && c.passed; ++s) {
    const int d = 1 + s % 2;
    const double side = d == 1 ? 256.0 : 16.0;
    const Domain dom(d, side);
    const auto pts = merge(sample_poisson(dom, 1.0, Color::Red, derive_seed(508, s, 0)),
                           sample_poisson(dom, 1.0, Color::Blue, derive_seed(508, s, 1)));
    const auto shifts = DyadicShifts::random(d, dyadic_top_level(dom), derive_seed(508, s, 2));
    const auto res = hierarchical_match(pts, shifts);
    for (const auto& lv : res.levels) {
      // Left after level k = sum over k-boxes of |R - B|.
      std::map<std::vector<std::int64_t>, long> balance;
      for (std::uint32_t i = 0; i < pts.size(); ++i)
        balance[k_box_id(dom, pts.point(i), lv.level, shifts)] += pts.color(i) == Color::Red ? 1 : -1;
      std::size_t expect = 0;
      for (const auto& [box, b] : balance) expect += static_cast<std::size_t>(std::labs(b));
      if (lv.red_left + lv.blue_left != expect) {
        c.passed = false;
        c.detail = "seed " + std::to_string(s) + " level " + std::to_string(lv.level);
        break;
      }
    }
  }
  return c;
}

}  // namespace

std::vector<OracleCheck> oracle_suite(const OracleOptions& options) {
  const int n = options.seeds;
  std::vector<OracleCheck> out;
  out.push_back(stable_vs_enumeration(options));
  out.push_back(assignment_vs_permutations(n));
  out.push_back(subset_dp_vs_enumeration(n));
  out.push_back(grid_vs_scan(std::max(1, n / 4)));
  out.push_back(msf_vs_prim(std::max(1, n / 4)));
  out.push_back(timeline_vs_stable(std::max(1, n / 4)));
  out.push_back(indexed_vs_quadratic(std::max(1, n / 4), options.rule));
  out.push_back(hierarchical_surplus(std::max(1, n / 10)));
  return out;
}

}  // namespace pm
