#include "pointmatch/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

#include "pointmatch/oracles.hpp"
#include "pointmatch/random.hpp"
#include "pointmatch/spatial_index.hpp"

namespace pm {

// ---------------------------------------------------------------------------
// Dyadic boxes

DyadicShifts DyadicShifts::random(int dim, int top_level, std::uint64_t seed) {
  Rng rng(seed);
  DyadicShifts s;
  s.tau.assign(static_cast<std::size_t>(top_level) + 1, std::vector<std::uint8_t>(dim, 0));
  for (auto& t : s.tau)
    for (auto& bit : t) bit = static_cast<std::uint8_t>(rng() >> 63);
  return s;
}

DyadicShifts DyadicShifts::zero(int dim, int top_level) {
  DyadicShifts s;
  s.tau.assign(static_cast<std::size_t>(top_level) + 1, std::vector<std::uint8_t>(dim, 0));
  return s;
}

int dyadic_top_level(const Domain& domain) {
  const double side = domain.side();
  int exponent = 0;
  const double mantissa = std::frexp(side, &exponent);
  if (mantissa != 0.5 || exponent < 1)
    throw std::invalid_argument("dyadic boxes need a torus side 2^K with K >= 0 (got L=" +
                                std::to_string(side) + ")");
  return exponent - 1;
}

namespace {

std::int64_t positive_mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

std::vector<std::int64_t> k_box_id(const Domain& domain, std::span<const double> x, int k,
                                   const DyadicShifts& shifts) {
  const int d = domain.dim();
  if (k < 0) throw std::invalid_argument("box level must be >= 0");
  if (static_cast<std::size_t>(k) > shifts.tau.size())
    throw std::invalid_argument("not enough dyadic shifts for level " + std::to_string(k));
  int top = 0;
  if (domain.is_torus()) {
    top = dyadic_top_level(domain);
    if (k > top) throw std::invalid_argument("box level exceeds log2(L)");
  }
  const double width = std::ldexp(1.0, k);
  std::vector<std::int64_t> id(d);
  for (int a = 0; a < d; ++a) {
    double offset = 0;
    for (int i = 0; i < k; ++i) offset += std::ldexp(static_cast<double>(shifts.tau[i][a]), i);
    id[a] = static_cast<std::int64_t>(std::floor((x[a] - offset) / width));
    if (domain.is_torus()) id[a] = positive_mod(id[a], std::int64_t{1} << (top - k));
  }
  return id;
}

HierarchicalResult hierarchical_match(const ColoredPointSet& points, const DyadicShifts& shifts) {
  const Domain& dom = points.domain();
  if (!dom.is_torus()) throw std::invalid_argument("hierarchical matching runs on a torus");
  const int top = dyadic_top_level(dom);
  if (shifts.top_level() < top)
    throw std::invalid_argument("dyadic shifts cover fewer levels than log2(L)");
  const int d = dom.dim();

  HierarchicalResult out;
  Matching& m = out.matching;
  m.mode = MatchMode::TwoColor;

  std::vector<std::uint32_t> live(points.size());
  std::iota(live.begin(), live.end(), 0u);
  std::vector<char> matched(points.size(), 0);
  std::vector<std::pair<std::int64_t, std::uint32_t>> keyed;
  std::vector<std::uint32_t> reds, blues;

  for (int k = 0; k <= top; ++k) {
    const std::int64_t per_axis = std::int64_t{1} << (top - k);
    keyed.clear();
    for (std::uint32_t i : live) {
      const auto id = k_box_id(dom, points.point(i), k, shifts);
      std::int64_t flat = 0;
      for (int a = d - 1; a >= 0; --a) flat = flat * per_axis + id[a];
      keyed.emplace_back(flat, i);
    }
    std::sort(keyed.begin(), keyed.end());
    LevelStats stats;
    stats.level = k;
    stats.boxes = 1;
    for (int a = 0; a < d; ++a) stats.boxes *= static_cast<std::size_t>(per_axis);
    for (std::size_t lo = 0; lo < keyed.size();) {
      std::size_t hi = lo;
      reds.clear();
      blues.clear();
      while (hi < keyed.size() && keyed[hi].first == keyed[lo].first) {
        const std::uint32_t i = keyed[hi].second;
        (points.color(i) == Color::Red ? reds : blues).push_back(i);
        ++hi;
      }
      if (!reds.empty() && !blues.empty()) {
        for (const Pair& p : min_length_bipartite_pairs(points, reds, blues)) {
          m.pairs.push_back(p);
          m.pair_level.push_back(k);
          matched[p.a] = matched[p.b] = 1;
          ++stats.pairs;
        }
      }
      lo = hi;
    }
    std::erase_if(live, [&](std::uint32_t i) { return matched[i] != 0; });
    for (std::uint32_t i : live) ++(points.color(i) == Color::Red ? stats.red_left : stats.blue_left);
    out.levels.push_back(stats);
  }
  m.unmatched = live;
  m.normalize();
  return out;
}

// ---------------------------------------------------------------------------
// Adjacent matching

Matching adjacent_match_1d(const ColoredPointSet& points, bool coin) {
  const Domain& dom = points.domain();
  if (dom.dim() != 1 || !dom.is_torus())
    throw std::invalid_argument("adjacent matching needs a one-dimensional torus");
  const std::size_t n = points.size();
  if (n < 2) throw std::invalid_argument("adjacent matching needs at least two points");
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const double xa = points.point(a)[0], xb = points.point(b)[0];
    return xa != xb ? xa < xb : a < b;
  });
  Matching m;
  m.mode = MatchMode::OneColor;
  const std::size_t start = coin ? 1 : 0;
  std::size_t k = start;
  for (; k + 1 < start + n - (n % 2); k += 2)
    m.pairs.push_back(Pair::of(order[k % n], order[(k + 1) % n]));
  if (n % 2 == 1) m.unmatched.push_back(order[coin ? 0 : n - 1]);
  m.normalize();
  return m;
}

// ---------------------------------------------------------------------------
// Forests

Forest Forest::from_parents(const ColoredPointSet& points, std::vector<std::int64_t> parent) {
  const std::size_t n = parent.size();
  if (n != points.size()) throw std::invalid_argument("parent array size mismatch");
  Forest f;
  f.parent = std::move(parent);
  f.children.assign(n, {});
  for (std::size_t v = 0; v < n; ++v) {
    const std::int64_t p = f.parent[v];
    if (p < 0) {
      f.roots.push_back(static_cast<std::uint32_t>(v));
    } else {
      if (static_cast<std::size_t>(p) >= n || static_cast<std::size_t>(p) == v)
        throw std::invalid_argument("invalid parent index");
      f.children[static_cast<std::size_t>(p)].push_back(static_cast<std::uint32_t>(v));
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    auto& kids = f.children[v];
    std::vector<std::pair<double, std::uint32_t>> keyed;
    keyed.reserve(kids.size());
    for (auto c : kids) keyed.emplace_back(points.distance2(v, c), c);
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t k = 0; k < kids.size(); ++k) kids[k] = keyed[k].second;
  }
  // Every vertex must reach a root.
  std::vector<char> state(n, 0);  // 0 unknown, 1 on current path, 2 reaches a root
  std::vector<std::size_t> path;
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t u = v;
    path.clear();
    while (state[u] == 0) {
      state[u] = 1;
      path.push_back(u);
      if (f.parent[u] < 0) break;
      u = static_cast<std::size_t>(f.parent[u]);
    }
    if (state[u] == 1 && f.parent[u] >= 0) throw std::invalid_argument("parent links contain a cycle");
    for (auto w : path) state[w] = 2;
  }
  return f;
}

namespace {

struct Dsu {
  std::vector<std::uint32_t> up, rank;
  explicit Dsu(std::size_t n) : up(n), rank(n, 0) { std::iota(up.begin(), up.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (up[x] != x) {
      up[x] = up[up[x]];
      x = up[x];
    }
    return x;
  }
  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank[a] < rank[b]) std::swap(a, b);
    up[b] = a;
    if (rank[a] == rank[b]) ++rank[a];
    return true;
  }
};

struct Edge {
  double d2;
  std::uint32_t a, b;  // a < b
  bool operator<(const Edge& o) const {
    if (d2 != o.d2) return d2 < o.d2;
    if (a != o.a) return a < o.a;
    return b < o.b;
  }
};

}  // namespace

Forest minimal_spanning_forest(const ColoredPointSet& points) {
  const std::size_t n = points.size();
  if (n == 0) throw std::invalid_argument("minimal spanning forest of an empty set");
  const Domain& dom = points.domain();
  const double spacing = SpatialIndex::default_cell_size(dom, n);
  SpatialIndex index(points, spacing);

  // Kruskal on all edges shorter than a few mean spacings; this already gives
  // exactly the MST edges below that threshold.
  const double threshold = 2.5 * spacing;
  std::vector<Edge> edges;
  for (std::uint32_t i = 0; i < n; ++i)
    index.for_each_within(points.point(i), threshold, [&](std::uint32_t j, double d2) {
      if (j > i) edges.push_back({d2, i, j});
    });
  std::sort(edges.begin(), edges.end());
  Dsu dsu(n);
  std::vector<Edge> tree;
  std::size_t components = n;
  for (const Edge& e : edges)
    if (dsu.unite(e.a, e.b)) {
      tree.push_back(e);
      --components;
    }

  // Boruvka steps on the remaining components. The minimum outgoing edge of
  // any component is an MST edge (cut property under the strict edge order),
  // so the largest component can be skipped.
  while (components > 1) {
    std::vector<std::uint32_t> size(n, 0);
    for (std::uint32_t i = 0; i < n; ++i) ++size[dsu.find(i)];
    std::uint32_t largest = 0;
    for (std::uint32_t i = 0; i < n; ++i)
      if (size[i] > size[largest]) largest = i;
    std::vector<std::optional<Edge>> best(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      const std::uint32_t ci = dsu.find(i);
      if (ci == largest) continue;
      auto hit = index.nearest(points.point(i), [&](std::uint32_t j) { return dsu.find(j) != ci; });
      if (!hit) continue;
      const Edge e{hit->dist2, std::min(i, hit->index), std::max(i, hit->index)};
      if (!best[ci] || e < *best[ci]) best[ci] = e;
    }
    bool progress = false;
    for (const auto& e : best) {
      if (e && dsu.unite(e->a, e->b)) {
        tree.push_back(*e);
        --components;
        progress = true;
      }
    }
    if (!progress) throw std::logic_error("minimal_spanning_forest: Boruvka step made no progress");
  }

  // Root at the smaller endpoint of the longest edge.
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (const Edge& e : tree) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  std::uint32_t root = 0;
  if (!tree.empty()) root = std::max_element(tree.begin(), tree.end())->a;
  std::vector<std::int64_t> parent(n, -2);
  parent[root] = -1;
  std::vector<std::uint32_t> stack{root};
  while (!stack.empty()) {
    const std::uint32_t v = stack.back();
    stack.pop_back();
    for (std::uint32_t w : adj[v])
      if (parent[w] == -2) {
        parent[w] = v;
        stack.push_back(w);
      }
  }
  return Forest::from_parents(points, std::move(parent));
}

double forest_length(const ColoredPointSet& points, const Forest& forest) {
  double total = 0;
  for (std::size_t v = 0; v < forest.size(); ++v)
    if (forest.parent[v] >= 0) total += points.distance(v, static_cast<std::size_t>(forest.parent[v]));
  return total;
}

bool in_forward_cone(std::span<const double> x, std::span<const double> z) {
  const double axial = z[0] - x[0];
  if (!(axial > 0)) return false;
  double radial2 = 0;
  for (std::size_t a = 1; a < x.size(); ++a) {
    const double t = z[a] - x[a];
    radial2 += t * t;
  }
  return axial * axial > radial2;
}

Forest cone_forest(const ColoredPointSet& points) {
  const Domain& dom = points.domain();
  if (dom.is_torus()) throw std::invalid_argument("cone forest is defined on box domains only");
  if (dom.dim() < 2) throw std::invalid_argument("cone forest needs d >= 2");
  const int d = dom.dim();
  const std::size_t n = points.size();
  if (d > SpatialIndex::kMaxDim) throw std::invalid_argument("cone forest supports d <= 16");

  // Private grid: layers along axis 1, square cross-sections on the others.
  const double spacing = SpatialIndex::default_cell_size(dom, std::max<std::size_t>(n, 1));
  int per_axis = std::max(1, static_cast<int>(std::floor(dom.side() / spacing)));
  while (std::pow(static_cast<double>(per_axis), d) > 4.0 * static_cast<double>(n) + 1024 &&
         per_axis > 1)
    --per_axis;
  const double cell = dom.side() / per_axis;
  auto cell_of = [&](double v) { return std::clamp(static_cast<int>(std::floor(v / cell)), 0, per_axis - 1); };
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(per_axis);
  std::vector<std::vector<std::uint32_t>> buckets(total);
  auto flat = [&](const std::array<int, SpatialIndex::kMaxDim>& c) {
    std::size_t f = 0;
    for (int a = d - 1; a >= 0; --a) f = f * static_cast<std::size_t>(per_axis) + static_cast<std::size_t>(c[a]);
    return f;
  };
  std::array<int, SpatialIndex::kMaxDim> c{};
  for (std::uint32_t i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a) c[a] = cell_of(points.point(i)[a]);
    buckets[flat(c)].push_back(i);
  }

  std::vector<std::int64_t> parent(n, -1);
  std::array<int, SpatialIndex::kMaxDim> centre{}, lo{}, hi{}, cur{};
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto x = points.point(i);
    for (int a = 0; a < d; ++a) centre[a] = cell_of(x[a]);
    std::int64_t best = -1;
    double best_first = std::numeric_limits<double>::infinity();
    for (int layer = 0; centre[0] + layer < per_axis; ++layer) {
      if ((centre[0] + layer) * cell > best_first) break;
      // Within this layer the cone is narrower than (layer + 1) cells.
      lo[0] = hi[0] = centre[0] + layer;
      for (int a = 1; a < d; ++a) {
        lo[a] = std::max(0, centre[a] - (layer + 1));
        hi[a] = std::min(per_axis - 1, centre[a] + (layer + 1));
      }
      cur = lo;
      while (true) {
        for (std::uint32_t j : buckets[flat(cur)]) {
          const auto z = points.point(j);
          if (j == i || !in_forward_cone(x, z)) continue;
          if (z[0] < best_first || (z[0] == best_first && j < best)) {
            best_first = z[0];
            best = j;
          }
        }
        int a = 1;
        while (a < d && cur[a] == hi[a]) {
          cur[a] = lo[a];
          ++a;
        }
        if (a >= d) break;
        ++cur[a];
      }
    }
    parent[i] = best;
  }
  return Forest::from_parents(points, std::move(parent));
}

Matching match_from_forest(const Forest& forest) {
  const std::size_t n = forest.size();
  Matching m;
  m.mode = MatchMode::OneColor;

  std::vector<char> alive(n, 1);
  std::vector<std::uint32_t> alive_children(n), nonleaf_children(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    alive_children[v] = static_cast<std::uint32_t>(forest.children[v].size());
    for (auto c : forest.children[v])
      if (!forest.children[c].empty()) ++nonleaf_children[v];
  }
  auto is_twig = [&](std::uint32_t v) {
    return alive[v] && alive_children[v] > 0 && nonleaf_children[v] == 0;
  };

  std::vector<std::uint32_t> candidates(n), twigs, next;
  std::iota(candidates.begin(), candidates.end(), 0u);
  std::vector<std::uint32_t> last_seen(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<std::uint32_t> kids;
  for (std::uint32_t round = 0;; ++round) {
    twigs.clear();
    for (auto v : candidates)
      if (last_seen[v] != round && is_twig(v)) {
        last_seen[v] = round;
        twigs.push_back(v);
      }
    if (twigs.empty()) break;
    next.clear();
    for (auto v : twigs) {
      kids.clear();
      for (auto c : forest.children[v])
        if (alive[c]) kids.push_back(c);
      for (std::size_t k = 0; k + 1 < kids.size(); k += 2) m.pairs.push_back(Pair::of(kids[k], kids[k + 1]));
      const bool odd = kids.size() % 2 == 1;
      if (odd) m.pairs.push_back(Pair::of(kids.back(), v));
      for (auto c : kids) alive[c] = 0;
      alive_children[v] = 0;
      if (odd) alive[v] = 0;
      const std::int64_t p = forest.parent[v];
      if (p >= 0) {
        const auto pu = static_cast<std::uint32_t>(p);
        --nonleaf_children[pu];
        if (odd) --alive_children[pu];
        next.push_back(pu);
        // pu lost its last child and is now a leaf of its own parent.
        if (odd && alive_children[pu] == 0 && forest.parent[pu] >= 0) {
          const auto pp = static_cast<std::uint32_t>(forest.parent[pu]);
          --nonleaf_children[pp];
          next.push_back(pp);
        }
      }
    }
    candidates.swap(next);
  }

  // Only the root of each tree may be left over.
  for (std::uint32_t v = 0; v < n; ++v) {
    if (!alive[v]) continue;
    if (forest.parent[v] >= 0)
      throw std::logic_error("match_from_forest: non-root vertex " + std::to_string(v) + " left unmatched");
    m.unmatched.push_back(v);
  }
  m.normalize();
  return m;
}

int forest_distance_capped(const Forest& forest, std::uint32_t i, std::uint32_t j) {
  if (i == j) return 0;
  const std::int64_t pi = forest.parent[i], pj = forest.parent[j];
  if (pi == j || pj == i) return 1;
  if (pi >= 0 && pi == pj) return 2;
  if (pi >= 0 && forest.parent[static_cast<std::size_t>(pi)] == j) return 2;
  if (pj >= 0 && forest.parent[static_cast<std::size_t>(pj)] == i) return 2;
  return 3;
}

void write_forest_csv(std::ostream& out, const Forest& forest) {
  out << "child,parent\n";
  for (std::size_t v = 0; v < forest.size(); ++v)
    if (forest.parent[v] >= 0) out << v << ',' << forest.parent[v] << '\n';
}

}  // namespace pm
