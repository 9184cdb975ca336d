#include "pointmatch/spatial_index.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace pm {

namespace {
constexpr std::size_t kMaxCells = std::size_t{1} << 24;
}

SpatialIndex::SpatialIndex(const ColoredPointSet& points, std::span<const std::uint32_t> members,
                           double cell_size)
    : points_(&points), domain_(points.domain()), torus_(points.domain().is_torus()) {
  if (domain_.dim() > kMaxDim) throw std::invalid_argument("spatial index supports d <= 16");
  slot_.assign(points.size(), -1);
  pos_.assign(points.size(), 0);
  build(members, cell_size);
}

SpatialIndex::SpatialIndex(const ColoredPointSet& points, double cell_size)
    : SpatialIndex(points,
                   [&] {
                     std::vector<std::uint32_t> all(points.size());
                     std::iota(all.begin(), all.end(), 0u);
                     return all;
                   }(),
                   cell_size) {}

double SpatialIndex::default_cell_size(const Domain& domain, std::size_t n) {
  if (n == 0) return domain.side();
  return std::pow(domain.volume() / static_cast<double>(n), 1.0 / domain.dim());
}

void SpatialIndex::build(std::span<const std::uint32_t> members, double cell_size) {
  if (!(cell_size > 0)) throw std::invalid_argument("cell size must be positive");
  const int d = domain_.dim();
  const double side = domain_.side();
  double per_axis = std::floor(side / cell_size);
  if (per_axis < 1) per_axis = 1;
  // Keep the grid no larger than the point count warrants.
  const double cap = std::min<double>(static_cast<double>(kMaxCells),
                                      std::max<double>(1024.0, 16.0 * members.size()));
  const double max_axis = std::floor(std::pow(cap, 1.0 / d) + 1e-9);
  per_axis = std::max(1.0, std::min(per_axis, max_axis));
  cells_per_axis_ = static_cast<int>(per_axis);
  cell_ = side / cells_per_axis_;

  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(cells_per_axis_);
  buckets_.assign(total, {});

  std::array<int, kMaxDim> c{};
  for (std::uint32_t i : members) {
    if (slot_[i] >= 0) continue;
    cell_coords(points_->point(i), c);
    const std::size_t f = flat(c);
    slot_[i] = static_cast<std::int64_t>(f);
    pos_[i] = static_cast<std::uint32_t>(buckets_[f].size());
    buckets_[f].push_back(i);
  }
  live_ = 0;
  for (const auto& b : buckets_) live_ += b.size();
  built_with_ = live_;
}

void SpatialIndex::cell_coords(std::span<const double> x, std::array<int, kMaxDim>& out) const {
  for (int a = 0; a < domain_.dim(); ++a) {
    int c = static_cast<int>(std::floor(x[a] / cell_));
    out[a] = std::clamp(c, 0, cells_per_axis_ - 1);
  }
}

std::size_t SpatialIndex::flat(const std::array<int, kMaxDim>& c) const {
  std::size_t f = 0;
  for (int a = domain_.dim() - 1; a >= 0; --a)
    f = f * static_cast<std::size_t>(cells_per_axis_) + static_cast<std::size_t>(c[a]);
  return f;
}

int SpatialIndex::max_ring() const { return torus_ ? cells_per_axis_ / 2 : cells_per_axis_ - 1; }

std::vector<std::uint32_t> SpatialIndex::live_points() const {
  std::vector<std::uint32_t> out;
  out.reserve(live_);
  for (const auto& b : buckets_) out.insert(out.end(), b.begin(), b.end());
  std::sort(out.begin(), out.end());
  return out;
}

bool SpatialIndex::remove(std::uint32_t i) {
  if (!contains(i)) return false;
  auto& bucket = buckets_[static_cast<std::size_t>(slot_[i])];
  const std::uint32_t p = pos_[i];
  const std::uint32_t last = bucket.back();
  bucket[p] = last;
  pos_[last] = p;
  bucket.pop_back();
  slot_[i] = -1;
  --live_;
  return true;
}

void SpatialIndex::rebuild(double cell_size) {
  const auto members = live_points();
  for (std::uint32_t i : members) slot_[i] = -1;
  build(members, cell_size);
}

bool SpatialIndex::compact() {
  if (live_ == 0 || live_ * 4 >= built_with_) return false;
  rebuild(default_cell_size(domain_, live_));
  return true;
}

}  // namespace pm
