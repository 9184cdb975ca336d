#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pointmatch/geometry.hpp"
#include "pointmatch/matching.hpp"

namespace pm {

/// The unique stable partial matching, computed by iterated matching of
/// mutually closest potential partners.
///
/// In one-color mode every pair of distinct points are potential partners and
/// colors are ignored; in two-color mode only red/blue pairs are. Distance ties
/// are broken by the smaller partner index, which is the same as ordering
/// candidate pairs by (distance, smaller index, larger index), so the output
/// is deterministic and still the unique stable matching under that order.
///
/// Each round recomputes nearest partners only for points whose nearest
/// partner was removed in the previous round. round_matched records the round.
/// Throws std::runtime_error if a round makes no progress while potential
/// partners remain.
Matching stable_match(const ColoredPointSet& points, MatchMode mode);

struct UnstablePair {
  std::uint32_t i;
  std::uint32_t j;
};

enum class Strictness {
  /// |x-y| < min(|x-m(x)|, |y-m(y)|): the definition of an unstable pair.
  Strict,
  /// <= instead of <; only for mutation tests of the verifiers.
  NonStrict,
};

/// O(n^2) scan for a potential-partner pair (not matched to each other) that
/// violates stability. Unmatched points have matched distance +infinity.
std::optional<UnstablePair> find_unstable_pair(const ColoredPointSet& points, const Matching& m,
                                               Strictness rule = Strictness::Strict);

/// Same answer set as find_unstable_pair (strict rule) using grid range queries;
/// near-linear on Poisson inputs.
std::optional<UnstablePair> find_unstable_pair_indexed(const ColoredPointSet& points,
                                                       const Matching& m);

/// A point is t-bad if its matched distance exceeds t (unmatched points are
/// t-bad for all t). Returns a pair of t-bad potential partners within
/// distance t of each other, which a stable matching never has.
std::optional<UnstablePair> find_bad_separation_violation(const ColoredPointSet& points,
                                                          const Matching& m, double t);

struct TimelineEvent {
  Pair pair;
  /// Radius at which the balls grown around the two points touch: |x-y|/2.
  double t;
};

/// Ball-growing realization: sorts all potential-partner pairs by distance and
/// matches a pair as soon as both endpoints are free. O(n^2 log n).
std::vector<TimelineEvent> match_radii_timeline(const ColoredPointSet& points, MatchMode mode);

/// Matched distance of every point (+infinity if unmatched).
std::vector<double> matched_distances(const ColoredPointSet& points, const Matching& m);

}  // namespace pm
