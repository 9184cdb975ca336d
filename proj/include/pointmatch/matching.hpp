#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pointmatch/geometry.hpp"

namespace pm {

enum class MatchMode { OneColor, TwoColor };

std::string to_string(MatchMode m);
MatchMode parse_match_mode(const std::string& s);

/// Unordered index pair, normalized so that a < b.
struct Pair {
  std::uint32_t a;
  std::uint32_t b;

  static Pair of(std::uint32_t x, std::uint32_t y) { return x < y ? Pair{x, y} : Pair{y, x}; }
  auto operator<=>(const Pair&) const = default;
};

inline constexpr std::int64_t kUnmatched = -1;

/// A partial matching of a point set.
struct Matching {
  MatchMode mode = MatchMode::OneColor;
  std::vector<Pair> pairs;
  std::vector<std::uint32_t> unmatched;
  /// Per point: round in which it was matched (0 = first pass), -1 if unmatched.
  /// Empty for schemes without a round structure.
  std::vector<int> round_matched;
  /// Per pair: level at which the pair was formed (hierarchical scheme only).
  std::vector<int> pair_level;
  /// Set for heuristics whose output is not an exact optimum.
  bool approximate = false;

  /// partner[i] = index of i's partner, or kUnmatched.
  std::vector<std::int64_t> partner_map(std::size_t n) const;

  /// Pairs sorted, unmatched sorted; annotations permuted along with pairs.
  void normalize();
};

/// Throws std::logic_error unless pairs are disjoint, pairs and unmatched
/// together cover every point exactly once, and (two-color mode) every pair
/// joins a red and a blue point.
void validate_matching(const ColoredPointSet& points, const Matching& m);

double total_length(const ColoredPointSet& points, const Matching& m);

/// Rows `i,j,dist`, then a `# unmatched=<comma list>` footer.
void write_matching_csv(std::ostream& out, const ColoredPointSet& points, const Matching& m);
Matching read_matching_csv(std::istream& in, MatchMode mode);

struct SvgStyle {
  double size_px = 800.0;
  double point_radius_px = 2.0;
  std::string title;
};

/// Draws the first two coordinates of every point and a segment between
/// partners. On a torus, wrapping segments are drawn through the boundary.
void write_matching_svg(std::ostream& out, const ColoredPointSet& points, const Matching& m,
                        const SvgStyle& style = {});

}  // namespace pm
