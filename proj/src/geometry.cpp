#include "pointmatch/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pointmatch/random.hpp"

namespace pm {

std::string to_string(Boundary b) { return b == Boundary::Torus ? "torus" : "box"; }

Boundary parse_boundary(const std::string& s) {
  if (s == "torus") return Boundary::Torus;
  if (s == "box") return Boundary::Box;
  throw std::invalid_argument("unknown boundary '" + s + "' (expected torus|box)");
}

Domain::Domain(int dim, double side, Boundary boundary)
    : dim_(dim), side_(side), half_side_(side / 2), boundary_(boundary) {
  if (dim < 1) throw std::invalid_argument("domain dimension must be >= 1");
  if (!(side > 0) || !std::isfinite(side))
    throw std::invalid_argument("domain side length must be positive and finite");
}

double Domain::volume() const { return std::pow(side_, dim_); }

bool Domain::contains(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) return false;
  return std::all_of(x.begin(), x.end(), [&](double v) { return v >= 0.0 && v < side_; });
}

double Domain::distance(std::span<const double> x, std::span<const double> y) const {
  return std::sqrt(distance2(x, y));
}

double Domain::displacement(double x, double y) const {
  double delta = y - x;
  if (boundary_ == Boundary::Torus) {
    if (delta > half_side_) delta -= side_;
    else if (delta < -half_side_) delta += side_;
  }
  return delta;
}

double Domain::distance_to_boundary(std::span<const double> x) const {
  if (is_torus()) return std::numeric_limits<double>::infinity();
  double m = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dim_; ++a) m = std::min({m, x[a], side_ - x[a]});
  return m;
}

ColoredPointSet::ColoredPointSet(Domain domain, std::uint64_t seed)
    : domain_(domain), seed_(seed) {}

ColoredPointSet::ColoredPointSet(Domain domain, std::vector<double> coords,
                                 std::vector<Color> colors, std::uint64_t seed)
    : domain_(domain), coords_(std::move(coords)), colors_(std::move(colors)), seed_(seed) {
  const auto d = static_cast<std::size_t>(domain_.dim());
  if (coords_.size() != colors_.size() * d)
    throw std::invalid_argument("coordinate array size does not match colors * dimension");
  for (std::size_t i = 0; i < colors_.size(); ++i)
    if (!domain_.contains(point(i)))
      throw std::invalid_argument("point " + std::to_string(i) + " lies outside the domain");
}

std::size_t ColoredPointSet::count(Color c) const {
  return static_cast<std::size_t>(std::count(colors_.begin(), colors_.end(), c));
}

std::vector<std::uint32_t> ColoredPointSet::indices_of(Color c) const {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < colors_.size(); ++i)
    if (colors_[i] == c) out.push_back(static_cast<std::uint32_t>(i));
  return out;
}

void ColoredPointSet::push_back(std::span<const double> x, Color c) {
  if (!domain_.contains(x)) throw std::invalid_argument("point lies outside the domain");
  coords_.insert(coords_.end(), x.begin(), x.end());
  colors_.push_back(c);
}

namespace {

void fill_uniform(const Domain& domain, std::size_t n, Rng& rng, std::vector<double>& coords) {
  const double side = domain.side();
  const double top = std::nextafter(side, 0.0);
  coords.resize(n * static_cast<std::size_t>(domain.dim()));
  for (auto& v : coords) v = std::min(uniform01(rng) * side, top);
}

}  // namespace

ColoredPointSet sample_poisson(const Domain& domain, double intensity, Color color,
                               std::uint64_t seed) {
  if (!(intensity > 0) || !std::isfinite(intensity))
    throw std::invalid_argument("intensity must be positive");
  Rng rng(seed);
  std::poisson_distribution<std::uint64_t> count(intensity * domain.volume());
  const auto n = static_cast<std::size_t>(count(rng));
  std::vector<double> coords;
  fill_uniform(domain, n, rng, coords);
  return ColoredPointSet(domain, std::move(coords), std::vector<Color>(n, color), seed);
}

ColoredPointSet sample_binomial(const Domain& domain, std::size_t n, Color color,
                                std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> coords;
  fill_uniform(domain, n, rng, coords);
  return ColoredPointSet(domain, std::move(coords), std::vector<Color>(n, color), seed);
}

ColoredPointSet merge(const ColoredPointSet& a, const ColoredPointSet& b) {
  if (!(a.domain() == b.domain())) throw std::invalid_argument("cannot merge point sets on different domains");
  std::vector<double> coords = a.coords();
  coords.insert(coords.end(), b.coords().begin(), b.coords().end());
  std::vector<Color> colors = a.colors();
  colors.insert(colors.end(), b.colors().begin(), b.colors().end());
  return ColoredPointSet(a.domain(), std::move(coords), std::move(colors),
                         splitmix64(a.seed()) ^ b.seed());
}

ColoredPointSet add_palm_point(const ColoredPointSet& points, std::span<const double> location,
                               Color color) {
  if (!points.domain().contains(location))
    throw std::invalid_argument("palm point lies outside the domain");
  ColoredPointSet out = points;
  out.push_back(location, color);
  return out;
}

double distance(const Domain& domain, std::span<const double> x, std::span<const double> y) {
  return domain.distance(x, y);
}

GeneralPositionReport check_general_position(const ColoredPointSet& points, double tolerance) {
  struct Entry {
    double dist;
    std::uint32_t i, j;
  };
  const std::size_t n = points.size();
  std::vector<Entry> all;
  all.reserve(n * (n > 0 ? n - 1 : 0) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      all.push_back({points.distance(i, j), static_cast<std::uint32_t>(i),
                     static_cast<std::uint32_t>(j)});
  std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  GeneralPositionReport report;
  for (std::size_t k = 1; k < all.size(); ++k) {
    if (all[k].dist - all[k - 1].dist <= tolerance) {
      report.ok = false;
      report.witness = std::array<std::uint32_t, 4>{all[k - 1].i, all[k - 1].j, all[k].i, all[k].j};
      break;
    }
  }
  return report;
}

void write_points_csv(std::ostream& out, const ColoredPointSet& points) {
  const Domain& dom = points.domain();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", dom.side());
  out << "# seed=" << points.seed() << " d=" << dom.dim() << " L=" << buf
      << " boundary=" << to_string(dom.boundary()) << "\n";
  for (int a = 1; a <= dom.dim(); ++a) out << 'x' << a << ',';
  out << "color\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (double v : points.point(i)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << buf << ',';
    }
    out << (points.color(i) == Color::Red ? 'R' : 'B') << '\n';
  }
}

ColoredPointSet read_points_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw std::runtime_error("points csv: missing '# seed=...' header");
  std::uint64_t seed = 0;
  int dim = 0;
  double side = 0;
  Boundary boundary = Boundary::Torus;
  {
    std::istringstream hs(line.substr(2));
    std::string tok;
    while (hs >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
      if (key == "seed") seed = std::stoull(val);
      else if (key == "d") dim = std::stoi(val);
      else if (key == "L") side = std::stod(val);
      else if (key == "boundary") boundary = parse_boundary(val);
    }
  }
  Domain domain(dim, side, boundary);
  if (!std::getline(in, line)) throw std::runtime_error("points csv: missing column header");
  std::vector<double> coords;
  std::vector<Color> colors;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    for (int a = 0; a < dim; ++a) {
      if (!std::getline(ls, cell, ',')) throw std::runtime_error("points csv: short row");
      coords.push_back(std::stod(cell));
    }
    if (!std::getline(ls, cell, ',') || (cell != "R" && cell != "B"))
      throw std::runtime_error("points csv: bad color field");
    colors.push_back(cell == "R" ? Color::Red : Color::Blue);
  }
  return ColoredPointSet(domain, std::move(coords), std::move(colors), seed);
}

}  // namespace pm
