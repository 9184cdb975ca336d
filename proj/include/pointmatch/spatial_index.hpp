#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pointmatch/geometry.hpp"

namespace pm {

/// Uniform-grid bucket index over a subset of a point set, with deletion.
///
/// Queries return the exact nearest live point under the domain metric; ties
/// in distance go to the smaller point index. The index keeps a pointer to
/// the point set, which must outlive it. Single writer.
class SpatialIndex {
 public:
  static constexpr int kMaxDim = 16;

  struct Neighbor {
    std::uint32_t index;
    double dist2;
  };

  SpatialIndex(const ColoredPointSet& points, std::span<const std::uint32_t> members,
               double cell_size);
  SpatialIndex(const ColoredPointSet& points, double cell_size);

  /// About one point per cell for `n` points in the domain.
  static double default_cell_size(const Domain& domain, std::size_t n);

  std::size_t size() const { return live_; }
  bool empty() const { return live_ == 0; }
  bool contains(std::uint32_t i) const { return i < slot_.size() && slot_[i] >= 0; }
  double cell_size() const { return cell_; }
  int cells_per_axis() const { return cells_per_axis_; }
  std::vector<std::uint32_t> live_points() const;

  /// Removes point i; returns false if it was not live.
  bool remove(std::uint32_t i);

  /// Re-buckets the live points with a fresh cell size.
  void rebuild(double cell_size);

  /// Rebuilds at the default cell size once the live count has dropped below
  /// a quarter of the count at the last build. Returns true if it rebuilt.
  bool compact();

  std::optional<Neighbor> nearest(std::span<const double> query) const {
    return nearest(query, [](std::uint32_t) { return true; });
  }

  /// Nearest live point j with accept(j) true.
  template <class Accept>
  std::optional<Neighbor> nearest(std::span<const double> query, Accept&& accept) const {
    if (live_ == 0) return std::nullopt;
    std::array<int, kMaxDim> centre{};
    cell_coords(query, centre);
    std::optional<Neighbor> best;
    const int kmax = max_ring();
    for (int k = 0; k <= kmax; ++k) {
      visit_ring(centre, k, [&](std::size_t cell) {
        for (std::uint32_t j : buckets_[cell]) {
          if (!accept(j)) continue;
          const double d2 = domain_.distance2(query, points_->point(j));
          if (!best || d2 < best->dist2 || (d2 == best->dist2 && j < best->index))
            best = Neighbor{j, d2};
        }
      });
      if (best) {
        const double reach = k * cell_;
        if (best->dist2 < reach * reach) break;
      }
    }
    return best;
  }

  /// Calls visit(j, dist2) for every live j with distance strictly below radius.
  template <class Visit>
  void for_each_within(std::span<const double> query, double radius, Visit&& visit) const {
    if (live_ == 0) return;
    std::array<int, kMaxDim> centre{};
    cell_coords(query, centre);
    const double r2 = radius * radius;
    const double rings = std::ceil(radius / cell_) + 1;
    const int kmax = rings < max_ring() ? static_cast<int>(rings) : max_ring();
    for (int k = 0; k <= kmax; ++k) {
      visit_ring(centre, k, [&](std::size_t cell) {
        for (std::uint32_t j : buckets_[cell]) {
          const double d2 = domain_.distance2(query, points_->point(j));
          if (d2 < r2) visit(j, d2);
        }
      });
    }
  }

 private:
  void build(std::span<const std::uint32_t> members, double cell_size);
  void cell_coords(std::span<const double> x, std::array<int, kMaxDim>& out) const;
  std::size_t flat(const std::array<int, kMaxDim>& c) const;
  int max_ring() const;

  /// Calls fn(flat cell id) once for each cell at Chebyshev ring distance
  /// exactly k from centre (wrapped on the torus, clipped in a box).
  template <class Fn>
  void visit_ring(const std::array<int, kMaxDim>& centre, int k, Fn&& fn) const {
    const int n = cells_per_axis_;
    const int d = domain_.dim();
    if (k == 0) {
      fn(flat(centre));
      return;
    }
    // Offset range allowed on an axis for a given radius r.
    auto lo_of = [&](int axis, int r) {
      if (torus_) return -std::min(r, (n - 1) / 2);
      return -std::min(r, centre[axis]);
    };
    auto hi_of = [&](int axis, int r) {
      if (torus_) return std::min(r, n / 2);
      return std::min(r, n - 1 - centre[axis]);
    };
    std::array<int, kMaxDim> lo{}, hi{}, off{}, cell{};
    for (int face = 0; face < d; ++face) {
      for (int sign : {-1, 1}) {
        const int fixed = sign * k;
        if (fixed < lo_of(face, k) || fixed > hi_of(face, k)) continue;
        bool empty = false;
        for (int b = 0; b < d; ++b) {
          if (b == face) {
            lo[b] = hi[b] = fixed;
          } else {
            const int r = b < face ? k - 1 : k;
            lo[b] = lo_of(b, r);
            hi[b] = hi_of(b, r);
          }
          if (lo[b] > hi[b]) empty = true;
          off[b] = lo[b];
        }
        if (empty) continue;
        while (true) {
          for (int b = 0; b < d; ++b) {
            int c = centre[b] + off[b];
            if (torus_) {
              if (c < 0) c += n;
              else if (c >= n) c -= n;
            }
            cell[b] = c;
          }
          fn(flat(cell));
          int b = 0;
          while (b < d && off[b] == hi[b]) {
            off[b] = lo[b];
            ++b;
          }
          if (b == d) break;
          ++off[b];
        }
      }
    }
  }

  const ColoredPointSet* points_;
  Domain domain_;
  bool torus_;
  int cells_per_axis_ = 1;
  double cell_ = 1.0;
  std::vector<std::vector<std::uint32_t>> buckets_;
  std::vector<std::int64_t> slot_;
  std::vector<std::uint32_t> pos_;
  std::size_t live_ = 0;
  std::size_t built_with_ = 0;
};

}  // namespace pm
