#include "pointmatch/matching.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pm {

std::string to_string(MatchMode m) { return m == MatchMode::OneColor ? "one-color" : "two-color"; }

MatchMode parse_match_mode(const std::string& s) {
  if (s == "one-color" || s == "one" || s == "1") return MatchMode::OneColor;
  if (s == "two-color" || s == "two" || s == "2") return MatchMode::TwoColor;
  throw std::invalid_argument("unknown matching mode '" + s + "' (expected one-color|two-color)");
}

std::vector<std::int64_t> Matching::partner_map(std::size_t n) const {
  std::vector<std::int64_t> partner(n, kUnmatched);
  for (const Pair& p : pairs) {
    partner[p.a] = p.b;
    partner[p.b] = p.a;
  }
  return partner;
}

void Matching::normalize() {
  for (Pair& p : pairs) p = Pair::of(p.a, p.b);
  if (!pair_level.empty()) {
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return pairs[x] < pairs[y]; });
    std::vector<Pair> sp;
    std::vector<int> sl;
    for (auto k : order) {
      sp.push_back(pairs[k]);
      sl.push_back(pair_level[k]);
    }
    pairs = std::move(sp);
    pair_level = std::move(sl);
  } else {
    std::sort(pairs.begin(), pairs.end());
  }
  std::sort(unmatched.begin(), unmatched.end());
}

void validate_matching(const ColoredPointSet& points, const Matching& m) {
  const std::size_t n = points.size();
  std::vector<int> seen(n, 0);
  auto mark = [&](std::uint32_t i) {
    if (i >= n) throw std::logic_error("matching refers to point " + std::to_string(i) + " out of range");
    if (seen[i]++) throw std::logic_error("point " + std::to_string(i) + " appears twice in matching");
  };
  for (const Pair& p : m.pairs) {
    if (p.a == p.b) throw std::logic_error("point matched to itself");
    mark(p.a);
    mark(p.b);
    if (m.mode == MatchMode::TwoColor && points.color(p.a) == points.color(p.b))
      throw std::logic_error("two-color pair (" + std::to_string(p.a) + "," + std::to_string(p.b) +
                             ") joins points of one color");
  }
  for (std::uint32_t u : m.unmatched) mark(u);
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i]) throw std::logic_error("point " + std::to_string(i) + " missing from matching");
  if (!m.pair_level.empty() && m.pair_level.size() != m.pairs.size())
    throw std::logic_error("pair_level size mismatch");
}

double total_length(const ColoredPointSet& points, const Matching& m) {
  double total = 0;
  for (const Pair& p : m.pairs) total += points.distance(p.a, p.b);
  return total;
}

void write_matching_csv(std::ostream& out, const ColoredPointSet& points, const Matching& m) {
  char buf[64];
  out << "i,j,dist\n";
  for (const Pair& p : m.pairs) {
    std::snprintf(buf, sizeof buf, "%.17g", points.distance(p.a, p.b));
    out << p.a << ',' << p.b << ',' << buf << '\n';
  }
  out << "# unmatched=";
  for (std::size_t k = 0; k < m.unmatched.size(); ++k) out << (k ? "," : "") << m.unmatched[k];
  out << '\n';
}

Matching read_matching_csv(std::istream& in, MatchMode mode) {
  Matching m;
  m.mode = mode;
  std::string line;
  if (!std::getline(in, line) || line != "i,j,dist")
    throw std::runtime_error("matching csv: expected header 'i,j,dist'");
  bool footer = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# unmatched=", 0) == 0) {
      std::istringstream ls(line.substr(12));
      std::string cell;
      while (std::getline(ls, cell, ','))
        if (!cell.empty()) m.unmatched.push_back(static_cast<std::uint32_t>(std::stoul(cell)));
      footer = true;
      continue;
    }
    std::istringstream ls(line);
    std::string a, b;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ','))
      throw std::runtime_error("matching csv: short row");
    m.pairs.push_back(Pair::of(static_cast<std::uint32_t>(std::stoul(a)),
                               static_cast<std::uint32_t>(std::stoul(b))));
  }
  if (!footer) throw std::runtime_error("matching csv: missing '# unmatched=' footer");
  return m;
}

void write_matching_svg(std::ostream& out, const ColoredPointSet& points, const Matching& m,
                        const SvgStyle& style) {
  const Domain& dom = points.domain();
  const double side = dom.side();
  const double px = style.size_px;
  const double scale = px / side;
  const bool two_d = dom.dim() >= 2;
  auto coord = [&](std::size_t i, int axis) {
    if (axis == 1 && !two_d) return side / 2;
    return points.point(i)[axis];
  };
  char buf[256];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px << "\" height=\"" << px + 24
      << "\" viewBox=\"0 0 " << px << ' ' << px + 24 << "\">\n";
  out << "<defs><clipPath id=\"frame\"><rect x=\"0\" y=\"0\" width=\"" << px << "\" height=\"" << px
      << "\"/></clipPath></defs>\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << px << "\" height=\"" << px
      << "\" fill=\"white\" stroke=\"black\"/>\n";
  if (!style.title.empty())
    out << "<text x=\"4\" y=\"" << px + 18 << "\" font-family=\"sans-serif\" font-size=\"14\">"
        << style.title << (m.approximate ? " (approximate)" : "") << "</text>\n";
  out << "<g clip-path=\"url(#frame)\" stroke=\"black\" stroke-width=\"1\">\n";
  auto segment = [&](double x0, double y0, double x1, double y1) {
    std::snprintf(buf, sizeof buf, "<line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\"/>\n",
                  x0 * scale, (side - y0) * scale, x1 * scale, (side - y1) * scale);
    out << buf;
  };
  for (const Pair& p : m.pairs) {
    const double xa = coord(p.a, 0), ya = coord(p.a, 1);
    const double xb = coord(p.b, 0), yb = coord(p.b, 1);
    const double dx = dom.displacement(xa, xb);
    const double dy = two_d ? dom.displacement(ya, yb) : 0.0;
    segment(xa, ya, xa + dx, ya + dy);
    if (std::abs(xa + dx - xb) > 1e-12 || std::abs(ya + dy - yb) > 1e-12)
      segment(xb, yb, xb - dx, yb - dy);
  }
  out << "</g>\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const char* fill = points.color(i) == Color::Red ? "#d62728" : "#1f77b4";
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"%.2f\" fill=\"%s\"/>\n",
                  coord(i, 0) * scale, (side - coord(i, 1)) * scale, style.point_radius_px, fill);
    out << buf;
  }
  out << "</svg>\n";
}

}  // namespace pm
