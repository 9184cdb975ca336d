#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "pointmatch/geometry.hpp"
#include "pointmatch/matching.hpp"

namespace pm {

// ---------------------------------------------------------------------------
// Hierarchical dyadic-box matching

/// Random offsets tau_0..tau_K, each a 0/1 vector of length d. The k-boxes are
/// the translates of [0,2^k)^d by 2^k z + sum_{i<k} 2^i tau_i.
struct DyadicShifts {
  std::vector<std::vector<std::uint8_t>> tau;

  static DyadicShifts random(int dim, int top_level, std::uint64_t seed);
  static DyadicShifts zero(int dim, int top_level);
  int top_level() const { return static_cast<int>(tau.size()) - 1; }
};

/// log2(L) for a torus side that is an exact power of two; throws otherwise.
int dyadic_top_level(const Domain& domain);

/// Integer coordinates of the k-box containing x. On a torus of side 2^K the
/// coordinates are reduced modulo 2^(K-k).
std::vector<std::int64_t> k_box_id(const Domain& domain, std::span<const double> x, int k,
                                   const DyadicShifts& shifts);

struct LevelStats {
  int level = 0;
  std::size_t boxes = 0;
  std::size_t pairs = 0;
  /// Points of each color still unmatched after this level.
  std::size_t red_left = 0;
  std::size_t blue_left = 0;
};

struct HierarchicalResult {
  Matching matching;  // pair_level filled
  std::vector<LevelStats> levels;
};

/// Matches red to blue level by level: inside every k-box the surviving points
/// get a maximum-cardinality minimum-length bipartite matching, matched points
/// are removed, and the next level is processed. Torus with L = 2^K only; the
/// level-K box is the whole torus, and anything left after it stays unmatched.
HierarchicalResult hierarchical_match(const ColoredPointSet& points, const DyadicShifts& shifts);

// ---------------------------------------------------------------------------
// Adjacent matching on the circle

/// d = 1 torus. Sorts the points around the circle and matches consecutive
/// points, starting at the first (coin = false) or the second (coin = true)
/// point. With an odd count the one point left without a neighbour is unmatched.
Matching adjacent_match_1d(const ColoredPointSet& points, bool coin);

// ---------------------------------------------------------------------------
// Forests and matching from a forest

/// Rooted forest over a point set. children[v] are ordered by distance to v,
/// then by index.
struct Forest {
  std::vector<std::int64_t> parent;  // -1 for roots
  std::vector<std::vector<std::uint32_t>> children;
  std::vector<std::uint32_t> roots;

  std::size_t size() const { return parent.size(); }

  /// Builds children and roots from a parent array; throws on cycles.
  static Forest from_parents(const ColoredPointSet& points, std::vector<std::int64_t> parent);
};

/// Euclidean minimum spanning tree (the minimal spanning forest of a finite
/// set), rooted at the smaller-index endpoint of its longest edge. Throws on
/// an empty set.
Forest minimal_spanning_forest(const ColoredPointSet& points);

/// Sum of parent edge lengths.
double forest_length(const ColoredPointSet& points, const Forest& forest);

/// True iff z - x lies in the cone {w : w_1 > |(w_2, ..., w_d)|}.
bool in_forward_cone(std::span<const double> x, std::span<const double> z);

/// Each point x gets as parent the point of x + cone with least first
/// coordinate (ties to the smaller index); points with an empty cone are
/// roots. Box domains with d >= 2 only.
Forest cone_forest(const ColoredPointSet& points);

/// Repeatedly takes every twig (a non-leaf whose children are all leaves),
/// pairs its ordered children consecutively, pairs an odd last child with the
/// twig itself, and removes the matched vertices. At most the root of each
/// tree is left unmatched; anything else raises std::logic_error.
Matching match_from_forest(const Forest& forest);

/// Graph distance between i and j in the forest if it is at most 2, else 3.
int forest_distance_capped(const Forest& forest, std::uint32_t i, std::uint32_t j);

/// CSV rows `child,parent` (roots omitted).
void write_forest_csv(std::ostream& out, const Forest& forest);

}  // namespace pm
