#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pointmatch/errors.hpp"
#include "pointmatch/geometry.hpp"
#include "pointmatch/matching.hpp"
#include "pointmatch/stable.hpp"

namespace pm {

/// Minimum-cost assignment on a dense rows x cols matrix (row-major), rows <= cols.
/// Returns the column assigned to each row. Shortest augmenting path with
/// potentials, O(rows^2 * cols).
std::vector<std::uint32_t> solve_assignment(std::span<const double> cost, std::size_t rows,
                                            std::size_t cols);

/// Pairs of a maximum-cardinality bipartite matching of minimum total length
/// between the given red and blue index lists (unequal sizes allowed).
std::vector<Pair> min_length_bipartite_pairs(const ColoredPointSet& points,
                                             std::span<const std::uint32_t> red,
                                             std::span<const std::uint32_t> blue);

/// The same as a Matching; unmatched lists the leftover red and blue indices.
Matching min_length_bipartite(const ColoredPointSet& points, std::span<const std::uint32_t> red,
                              std::span<const std::uint32_t> blue);

/// Same, taking red and blue from the point colors.
Matching min_length_bipartite(const ColoredPointSet& points);

inline constexpr std::size_t kExactOneColorMax = 20;

/// Minimum-length perfect matching by subset dynamic programming, O(n 2^n).
/// Throws CapabilityError for odd n or n > 20.
Matching min_length_one_color_exact(const ColoredPointSet& points);

/// Repeatedly matches the globally closest pair of unmatched points. Marked
/// approximate. With an odd count the last point stays unmatched.
Matching min_length_one_color_greedy(const ColoredPointSet& points);

/// Pairwise exchange local search: replaces pairs {a,b},{c,d} by {a,c},{b,d}
/// or {a,d},{b,c} while that shortens the total. Returns the number of swaps.
std::size_t refine_two_opt(const ColoredPointSet& points, Matching& m, int max_passes = 50);

inline constexpr std::size_t kBruteForceStableMax = 8;

/// Number of perfect bipartite matchings with no unstable pair.
std::size_t count_stable_perfect_matchings(const ColoredPointSet& points,
                                           Strictness rule = Strictness::Strict);

/// Enumerates every perfect bipartite matching of |red| = |blue| <= 8 points and
/// returns the unique stable one. Throws std::logic_error if zero or several
/// are stable.
Matching brute_force_stable(const ColoredPointSet& points, Strictness rule = Strictness::Strict);

}  // namespace pm
