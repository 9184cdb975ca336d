#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pm {

enum class Boundary { Torus, Box };
enum class Color : std::uint8_t { Red, Blue };

std::string to_string(Boundary b);
Boundary parse_boundary(const std::string& s);
inline Color opposite(Color c) { return c == Color::Red ? Color::Blue : Color::Red; }

/// Finite stand-in for R^d: a cube [0,L)^d, either periodic or with hard walls.
class Domain {
 public:
  Domain(int dim, double side, Boundary boundary = Boundary::Torus);

  int dim() const { return dim_; }
  double side() const { return side_; }
  Boundary boundary() const { return boundary_; }
  bool is_torus() const { return boundary_ == Boundary::Torus; }
  double volume() const;

  bool contains(std::span<const double> x) const;

  /// Squared distance. All ordering decisions in the library go through this
  /// function so that comparisons are bit-consistent everywhere.
  double distance2(std::span<const double> x, std::span<const double> y) const {
    double acc = 0.0;
    for (int a = 0; a < dim_; ++a) {
      double delta = x[a] - y[a];
      if (delta < 0) delta = -delta;
      if (boundary_ == Boundary::Torus && delta > half_side_) delta = side_ - delta;
      acc += delta * delta;
    }
    return acc;
  }
  double distance(std::span<const double> x, std::span<const double> y) const;

  /// Signed per-axis displacement from x to the nearest image of y.
  double displacement(double x, double y) const;

  /// Distance from x to the nearest wall (infinite on a torus).
  double distance_to_boundary(std::span<const double> x) const;

  bool operator==(const Domain&) const = default;

 private:
  int dim_;
  double side_;
  double half_side_;
  Boundary boundary_;
};

/// Points in a domain with a color label each. Coordinates are stored flat,
/// point i occupying [i*d, (i+1)*d).
class ColoredPointSet {
 public:
  explicit ColoredPointSet(Domain domain, std::uint64_t seed = 0);
  ColoredPointSet(Domain domain, std::vector<double> coords, std::vector<Color> colors,
                  std::uint64_t seed = 0);

  const Domain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  std::size_t size() const { return colors_.size(); }
  bool empty() const { return colors_.empty(); }
  std::uint64_t seed() const { return seed_; }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(domain_.dim()),
            static_cast<std::size_t>(domain_.dim())};
  }
  Color color(std::size_t i) const { return colors_[i]; }
  const std::vector<double>& coords() const { return coords_; }
  const std::vector<Color>& colors() const { return colors_; }

  std::size_t count(Color c) const;
  std::vector<std::uint32_t> indices_of(Color c) const;

  double distance(std::size_t i, std::size_t j) const {
    return domain_.distance(point(i), point(j));
  }
  double distance2(std::size_t i, std::size_t j) const {
    return domain_.distance2(point(i), point(j));
  }

  /// Appends a point; throws if it lies outside the domain.
  void push_back(std::span<const double> x, Color c);

 private:
  Domain domain_;
  std::vector<double> coords_;
  std::vector<Color> colors_;
  std::uint64_t seed_;
};

/// Homogeneous Poisson process: Poisson(intensity * L^d) uniform points.
ColoredPointSet sample_poisson(const Domain& domain, double intensity, Color color,
                               std::uint64_t seed);

/// Exactly n i.i.d. uniform points.
ColoredPointSet sample_binomial(const Domain& domain, std::size_t n, Color color,
                                std::uint64_t seed);

/// Concatenation of two point sets on the same domain; indices of `b` are shifted by a.size().
ColoredPointSet merge(const ColoredPointSet& a, const ColoredPointSet& b);

/// Copy of `points` with one extra point appended (index = points.size()).
ColoredPointSet add_palm_point(const ColoredPointSet& points, std::span<const double> location,
                               Color color);

double distance(const Domain& domain, std::span<const double> x, std::span<const double> y);

struct GeneralPositionReport {
  bool ok = true;
  /// Two distinct index pairs whose distances agree within tolerance.
  std::optional<std::array<std::uint32_t, 4>> witness;
};

/// True iff all pairwise distances differ by more than `tolerance`. O(n^2 log n).
GeneralPositionReport check_general_position(const ColoredPointSet& points,
                                             double tolerance = 0.0);

/// CSV with header `# seed=.. d=.. L=.. boundary=..` then `x1,...,xd,color`.
void write_points_csv(std::ostream& out, const ColoredPointSet& points);
ColoredPointSet read_points_csv(std::istream& in);

}  // namespace pm
