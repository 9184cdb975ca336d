#include "pointmatch/stable.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "pointmatch/spatial_index.hpp"

namespace pm {

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
constexpr double kInf = std::numeric_limits<double>::infinity();

bool potential_partners(const ColoredPointSet& points, MatchMode mode, std::uint32_t i,
                        std::uint32_t j) {
  if (i == j) return false;
  return mode == MatchMode::OneColor || points.color(i) != points.color(j);
}

std::vector<double> matched_distance2(const ColoredPointSet& points, const Matching& m) {
  std::vector<double> out(points.size(), kInf);
  for (const Pair& p : m.pairs) out[p.a] = out[p.b] = points.distance2(p.a, p.b);
  return out;
}

}  // namespace

std::vector<double> matched_distances(const ColoredPointSet& points, const Matching& m) {
  auto d = matched_distance2(points, m);
  for (double& v : d) v = std::sqrt(v);
  return d;
}

Matching stable_match(const ColoredPointSet& points, MatchMode mode) {
  const std::size_t n = points.size();
  const Domain& dom = points.domain();
  Matching result;
  result.mode = mode;
  result.round_matched.assign(n, -1);

  // One index per color in two-color mode, a single index otherwise.
  std::vector<SpatialIndex> indices;
  std::vector<int> index_of(n, 0);
  if (mode == MatchMode::TwoColor) {
    for (Color c : {Color::Red, Color::Blue}) {
      const auto members = points.indices_of(c);
      indices.emplace_back(points, members, SpatialIndex::default_cell_size(dom, members.size()));
    }
    for (std::size_t i = 0; i < n; ++i) index_of[i] = points.color(i) == Color::Red ? 0 : 1;
  } else {
    indices.emplace_back(points, SpatialIndex::default_cell_size(dom, n));
  }

  std::vector<char> alive(n, 1);
  std::vector<std::uint32_t> nn(n, kNone);
  std::vector<std::vector<std::uint32_t>> watchers(n);

  auto partner_index = [&](std::uint32_t i) -> SpatialIndex& {
    return mode == MatchMode::TwoColor ? indices[1 - index_of[i]] : indices[0];
  };
  auto refresh = [&](std::uint32_t i) {
    auto hit = partner_index(i).nearest(points.point(i), [i](std::uint32_t j) { return j != i; });
    nn[i] = hit ? hit->index : kNone;
    if (hit) watchers[hit->index].push_back(i);
  };
  auto partners_remain = [&] {
    if (mode == MatchMode::TwoColor) return !indices[0].empty() && !indices[1].empty();
    return indices[0].size() >= 2;
  };

  std::vector<std::uint32_t> candidates(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    candidates[i] = i;
    refresh(i);
  }

  std::vector<std::uint32_t> matched_in(n, kNone), queued_in(n, kNone);
  std::vector<std::uint32_t> removed, affected;
  for (std::uint32_t round = 0; partners_remain(); ++round) {
    removed.clear();
    for (std::uint32_t i : candidates) {
      if (!alive[i] || nn[i] == kNone) continue;
      const std::uint32_t j = nn[i];
      if (!alive[j] || nn[j] != i || matched_in[i] == round || matched_in[j] == round) continue;
      matched_in[i] = matched_in[j] = round;
      result.pairs.push_back(Pair::of(i, j));
      removed.push_back(i);
      removed.push_back(j);
    }
    if (removed.empty())
      throw std::runtime_error("stable_match: round " + std::to_string(round) +
                               " matched no pair while potential partners remain "
                               "(inconsistent distance ties?)");
    for (std::uint32_t r : removed) {
      alive[r] = 0;
      result.round_matched[r] = static_cast<int>(round);
      (mode == MatchMode::TwoColor ? indices[index_of[r]] : indices[0]).remove(r);
    }
    affected.clear();
    for (std::uint32_t r : removed) {
      for (std::uint32_t w : watchers[r]) {
        if (alive[w] && nn[w] == r && queued_in[w] != round) {
          queued_in[w] = round;
          affected.push_back(w);
        }
      }
      std::vector<std::uint32_t>().swap(watchers[r]);
    }
    for (auto& idx : indices) idx.compact();
    for (std::uint32_t a : affected) refresh(a);
    candidates.swap(affected);
  }

  for (std::uint32_t i = 0; i < n; ++i)
    if (alive[i]) result.unmatched.push_back(i);
  result.normalize();
  return result;
}

std::optional<UnstablePair> find_unstable_pair(const ColoredPointSet& points, const Matching& m,
                                               Strictness rule) {
  const auto md = matched_distance2(points, m);
  const auto partner = m.partner_map(points.size());
  const std::size_t n = points.size();
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      if (!potential_partners(points, m.mode, i, j) || partner[i] == j) continue;
      const double d = points.distance2(i, j);
      const bool violates = rule == Strictness::Strict ? (d < md[i] && d < md[j])
                                                       : (d <= md[i] && d <= md[j]);
      if (violates) return UnstablePair{i, j};
    }
  }
  return std::nullopt;
}

std::optional<UnstablePair> find_unstable_pair_indexed(const ColoredPointSet& points,
                                                       const Matching& m) {
  const std::size_t n = points.size();
  if (n < 2) return std::nullopt;
  const Domain& dom = points.domain();
  const auto md = matched_distance2(points, m);
  const auto partner = m.partner_map(n);
  const bool two_color = m.mode == MatchMode::TwoColor;
  const double diameter = dom.side() * std::sqrt(static_cast<double>(dom.dim())) * (dom.is_torus() ? 0.5 : 1.0);

  // An unstable pair at distance delta in [t, 2t) joins two points whose
  // matched distances both exceed t. Level k searches only the points with
  // matched distance above t_k = base * 2^k, out to radius 2 t_k; level 0
  // takes every point and covers delta < 2 base.
  const double base = SpatialIndex::default_cell_size(dom, n);
  std::vector<std::uint32_t> members(n);
  for (std::uint32_t i = 0; i < n; ++i) members[i] = i;
  std::optional<UnstablePair> found;
  for (double t = base, lower = 0; lower <= diameter && !found; lower = t, t *= 2) {
    if (lower > 0) std::erase_if(members, [&](std::uint32_t i) { return !(md[i] > lower * lower); });
    if (members.size() < 2) break;
    const double reach = 2 * std::max(t, base);
    std::vector<std::uint32_t> by_color[2];
    for (auto i : members) by_color[two_color && points.color(i) == Color::Blue ? 1 : 0].push_back(i);
    std::vector<SpatialIndex> indices;
    for (const auto& group : by_color) {
      const double cell = std::max(0.5 * reach, SpatialIndex::default_cell_size(dom, std::max<std::size_t>(group.size(), 1)));
      indices.emplace_back(points, group, cell);
    }
    for (std::uint32_t i : members) {
      const SpatialIndex& target = two_color ? indices[points.color(i) == Color::Red ? 1 : 0] : indices[0];
      const double radius = std::min(std::sqrt(md[i]), reach) * (1 + 1e-12);
      target.for_each_within(points.point(i), radius, [&](std::uint32_t j, double d2) {
        if (found || j == i || partner[i] == j) return;
        if (d2 < md[i] && d2 < md[j]) found = UnstablePair{std::min(i, j), std::max(i, j)};
      });
      if (found) break;
    }
  }
  return found;
}

std::optional<UnstablePair> find_bad_separation_violation(const ColoredPointSet& points,
                                                          const Matching& m, double t) {
  const auto md = matched_distance2(points, m);
  const double t2 = t * t;
  std::vector<std::uint32_t> bad;
  for (std::uint32_t i = 0; i < points.size(); ++i)
    if (md[i] > t2) bad.push_back(i);
  if (bad.size() < 2) return std::nullopt;
  const double cell = std::max(t, SpatialIndex::default_cell_size(points.domain(), bad.size()));
  SpatialIndex index(points, bad, cell);
  std::optional<UnstablePair> found;
  for (std::uint32_t i : bad) {
    // Radius nudged outward so that distance exactly t is also examined.
    index.for_each_within(points.point(i), t * (1 + 1e-12), [&](std::uint32_t j, double d2) {
      if (found || !potential_partners(points, m.mode, i, j)) return;
      if (d2 <= t2) found = UnstablePair{std::min(i, j), std::max(i, j)};
    });
    if (found) break;
  }
  return found;
}

std::vector<TimelineEvent> match_radii_timeline(const ColoredPointSet& points, MatchMode mode) {
  struct Candidate {
    double d2;
    Pair pair;
  };
  const std::size_t n = points.size();
  std::vector<Candidate> all;
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j)
      if (potential_partners(points, mode, i, j)) all.push_back({points.distance2(i, j), {i, j}});
  std::sort(all.begin(), all.end(), [](const Candidate& x, const Candidate& y) {
    if (x.d2 != y.d2) return x.d2 < y.d2;
    return x.pair < y.pair;
  });
  std::vector<char> taken(n, 0);
  std::vector<TimelineEvent> events;
  for (const Candidate& c : all) {
    if (taken[c.pair.a] || taken[c.pair.b]) continue;
    taken[c.pair.a] = taken[c.pair.b] = 1;
    events.push_back({c.pair, std::sqrt(c.d2) / 2});
  }
  return events;
}

}  // namespace pm
