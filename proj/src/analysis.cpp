#include "pointmatch/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pointmatch/stable.hpp"

namespace pm {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::Stable: return "stable";
    case Scheme::Hierarchical: return "hier";
    case Scheme::Adjacent: return "adjacent";
    case Scheme::Msf: return "msf";
    case Scheme::Cone: return "cone";
    case Scheme::MinLength: return "minlen";
  }
  return "?";
}

Scheme parse_scheme(const std::string& s) {
  if (s == "stable") return Scheme::Stable;
  if (s == "hier" || s == "hierarchical") return Scheme::Hierarchical;
  if (s == "adjacent") return Scheme::Adjacent;
  if (s == "msf") return Scheme::Msf;
  if (s == "cone") return Scheme::Cone;
  if (s == "minlen") return Scheme::MinLength;
  throw std::invalid_argument("unknown scheme '" + s + "' (expected stable|hier|adjacent|msf|cone|minlen)");
}

DistanceSamples match_distances(const ColoredPointSet& points, const Matching& m, SampleMode mode,
                                double interior_margin) {
  const Domain& dom = points.domain();
  const bool trim = !dom.is_torus() && interior_margin > 0;
  auto interior = [&](std::uint32_t i) {
    return !trim || dom.distance_to_boundary(points.point(i)) >= interior_margin;
  };
  DistanceSamples out;
  for (const Pair& p : m.pairs) {
    const double dist = points.distance(p.a, p.b);
    if (mode == SampleMode::PerEndpoint) {
      for (std::uint32_t e : {p.a, p.b}) {
        if (interior(e)) out.values.push_back(dist);
        else ++out.excluded;
      }
    } else {
      std::uint32_t rep = p.a;
      if (m.mode == MatchMode::TwoColor && points.color(p.a) != Color::Red) rep = p.b;
      if (interior(rep)) out.values.push_back(dist);
      else ++out.excluded;
    }
  }
  for (std::uint32_t u : m.unmatched) {
    const bool counts = mode == SampleMode::PerEndpoint || m.mode == MatchMode::OneColor ||
                        points.color(u) == Color::Red;
    if (!counts) continue;
    if (interior(u)) ++out.censored;
    else ++out.excluded;
  }
  return out;
}

std::vector<SurvivalPoint> empirical_survival(std::span<const double> samples,
                                              std::span<const double> grid, std::size_t censored) {
  const std::size_t total = samples.size() + censored;
  if (total == 0) throw std::invalid_argument("empirical_survival: no observations");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<SurvivalPoint> out;
  out.reserve(grid.size());
  for (double r : grid) {
    const auto above = static_cast<std::size_t>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), r));
    out.push_back({r, static_cast<double>(above + censored) / static_cast<double>(total)});
  }
  return out;
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0) || !(hi >= lo)) throw std::invalid_argument("log_grid needs 0 < lo <= hi");
  std::vector<double> out;
  if (count == 0) return out;
  if (count == 1) return {lo};
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) out.push_back(lo * std::exp(step * static_cast<double>(k)));
  out.back() = hi;
  return out;
}

bool PowerLawFit::nonlinear() const {
  return points >= 5 && std::abs(curvature) > 3.0 * curvature_stderr && std::abs(curvature) > 0.02;
}

namespace {

// Delta-method variance of sum_k w_k log S_k when the S_k are empirical
// survival values of one sample of size n, ordered by increasing r.
double sampling_variance(std::span<const double> w, std::span<const double> surv, std::size_t n) {
  const double nd = static_cast<double>(n);
  double var = 0, tail = 0;
  for (std::size_t k = w.size(); k-- > 0;) {
    const double c = (1 - surv[k]) / (nd * surv[k]);
    var += c * w[k] * (w[k] + 2 * tail);
    tail += w[k];
  }
  return std::max(var, 0.0);
}

}  // namespace

PowerLawFit fit_power_law(std::span<const SurvivalPoint> curve, double r_min, double r_max,
                          std::size_t observations) {
  std::vector<double> xs, ys, surv;
  for (const auto& p : curve) {
    if (p.r < r_min || p.r > r_max) continue;
    if (!(p.survival > 0))
      throw std::invalid_argument("fit_power_law: zero survival inside the fit window");
    if (!(p.r > 0)) continue;
    xs.push_back(std::log(p.r));
    ys.push_back(std::log(p.survival));
    surv.push_back(p.survival);
  }
  const std::size_t n = xs.size();
  if (n < 5) throw std::invalid_argument("fit_power_law: fewer than 5 grid points in the fit window");

  double mx = 0, my = 0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  PowerLawFit fit;
  fit.r_min = r_min;
  fit.r_max = r_max;
  fit.points = n;
  const double slope = sxx > 0 ? sxy / sxx : 0.0;
  fit.exponent = -slope;
  fit.intercept = my - slope * mx;
  double rss = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double e = ys[k] - (fit.intercept + slope * xs[k]);
    rss += e * e;
  }
  fit.residual_std_error = sxx > 0 ? std::sqrt(rss / static_cast<double>(n - 2) / sxx) : 0.0;
  fit.std_error = fit.residual_std_error;
  std::vector<double> w(n);
  if (observations > 0 && sxx > 0) {
    for (std::size_t k = 0; k < n; ++k) w[k] = (xs[k] - mx) / sxx;
    fit.std_error = std::sqrt(fit.residual_std_error * fit.residual_std_error +
                              sampling_variance(w, surv, observations));
  }

  // Quadratic term via the component of (x - mx)^2 orthogonal to {1, x}.
  std::vector<double> q(n);
  double mq = 0;
  for (std::size_t k = 0; k < n; ++k) mq += (q[k] = (xs[k] - mx) * (xs[k] - mx));
  mq /= static_cast<double>(n);
  double sxq = 0;
  for (std::size_t k = 0; k < n; ++k) sxq += (xs[k] - mx) * (q[k] - mq);
  const double beta = sxx > 0 ? sxq / sxx : 0.0;
  double sqq = 0, sqy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    q[k] = (q[k] - mq) - beta * (xs[k] - mx);
    sqq += q[k] * q[k];
    sqy += q[k] * (ys[k] - my);
  }
  if (sqq > 0) {
    fit.curvature = sqy / sqq;
    double rss2 = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double e = ys[k] - (fit.intercept + slope * xs[k]) - fit.curvature * q[k];
      rss2 += e * e;
    }
    double var = rss2 / static_cast<double>(n - 3) / sqq;
    if (observations > 0) {
      for (std::size_t k = 0; k < n; ++k) w[k] = q[k] / sqq;
      var += sampling_variance(w, surv, observations);
    }
    fit.curvature_stderr = std::sqrt(var);
  }
  return fit;
}

double poisson_mean_nn_distance(int dim, double intensity) {
  const double d = dim;
  const double unit_ball = std::pow(std::numbers::pi, d / 2) / std::tgamma(d / 2 + 1);
  return std::tgamma(1 + 1 / d) * std::pow(intensity * unit_ball, -1 / d);
}

FitWindow default_fit_window(std::span<const double> samples, std::size_t censored,
                             double mean_nn_distance, double side) {
  FitWindow w{2 * mean_nn_distance, side / 4};
  if (censored < 100 && samples.size() + censored >= 100) {
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    // With r = sorted[N - (100 - censored)], fewer than 100 observations exceed r.
    const std::size_t k = sorted.size() - (100 - censored);
    w.r_max = std::min(w.r_max, sorted[k]);
  }
  return w;
}

double kolmogorov_survival(double x) {
  if (x <= 0) return 1.0;
  if (x < 1.18) {
    // Jacobi theta form converges fast for small x.
    const double pi = std::numbers::pi;
    double cdf = 0;
    for (int k = 1; k <= 20; ++k) {
      const double m = 2.0 * k - 1;
      cdf += std::exp(-m * m * pi * pi / (8 * x * x));
    }
    cdf *= std::sqrt(2 * pi) / x;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double q = 0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * x * x);
    q += term;
    if (std::abs(term) < 1e-16) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

namespace {

double ks_p_value(double statistic, double effective_n) {
  const double sn = std::sqrt(effective_n);
  return kolmogorov_survival((sn + 0.12 + 0.11 / sn) * statistic);
}

}  // namespace

KsResult ks_exponential(std::span<const double> samples, double rate) {
  if (samples.empty()) throw std::invalid_argument("ks_exponential: no samples");
  if (!(rate > 0)) throw std::invalid_argument("ks_exponential: rate must be positive");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double dmax = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = sorted[i] <= 0 ? 0.0 : -std::expm1(-rate * sorted[i]);
    const double lo = static_cast<double>(i) / n, hi = static_cast<double>(i + 1) / n;
    dmax = std::max({dmax, hi - f, f - lo});
  }
  return {dmax, ks_p_value(dmax, n), sorted.size()};
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double dmax = 0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    dmax = std::max(dmax, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return {dmax, ks_p_value(dmax, nx * ny / (nx + ny)), x.size() + y.size()};
}

void TailAccumulator::add(const DistanceSamples& s, std::size_t n_points) {
  samples.insert(samples.end(), s.values.begin(), s.values.end());
  censored += s.censored;
  points += n_points;
  ++trials;
}

void TailAccumulator::merge(const TailAccumulator& other) {
  samples.insert(samples.end(), other.samples.begin(), other.samples.end());
  censored += other.censored;
  points += other.points;
  trials += other.trials;
}

TailEstimate make_tail_estimate(TailAccumulator acc, std::optional<FitWindow> window,
                                std::size_t grid_points) {
  TailEstimate t;
  t.samples = std::move(acc.samples);
  std::sort(t.samples.begin(), t.samples.end());
  t.censored = acc.censored;
  t.points = acc.points;
  t.trials = acc.trials;
  if (t.samples.empty()) return t;
  double lo = t.samples.front(), hi = t.samples.back();
  if (window) {
    lo = std::min(lo, window->r_min);
    hi = std::max(hi, window->r_max);
  }
  lo = std::max(lo, 1e-6 * hi);
  if (!(lo > 0)) lo = 1e-12;
  std::vector<double> grid{0.0};
  const auto logs = log_grid(lo, hi, grid_points);
  grid.insert(grid.end(), logs.begin(), logs.end());
  if (window) {
    // A dense sub-grid over the fit window keeps the regression well sampled.
    const auto inner = log_grid(window->r_min, std::max(window->r_max, window->r_min), grid_points);
    grid.insert(grid.end(), inner.begin(), inner.end());
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  t.survival = empirical_survival(t.samples, grid, t.censored);
  if (window && window->r_max > window->r_min) {
    std::vector<SurvivalPoint> inner;
    for (const auto& p : t.survival) {
      if (p.r >= window->r_min && p.r <= window->r_max) inner.push_back(p);
    }
    try {
      t.fit = fit_power_law(inner, window->r_min, window->r_max, t.samples.size() + t.censored);
    } catch (const std::invalid_argument&) {
      t.fit.reset();
    }
  }
  return t;
}

void write_tail_csv(std::ostream& out, const TailEstimate& tail) {
  char buf[96];
  out << "r,survival\n";
  for (const auto& p : tail.survival) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", p.r, p.survival);
    out << buf;
  }
}

void write_tail_svg(std::ostream& out, const TailEstimate& tail, const std::string& title) {
  const double w = 640, h = 480, margin = 60;
  std::vector<SurvivalPoint> pts;
  for (const auto& p : tail.survival)
    if (p.r > 0 && p.survival > 0) pts.push_back(p);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n<rect width=\"" << w << "\" height=\"" << h
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << margin << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title
      << "</text>\n";
  if (pts.size() < 2) {
    out << "</svg>\n";
    return;
  }
  double x0 = std::log10(pts.front().r), x1 = std::log10(pts.back().r);
  double y0 = std::log10(pts.back().survival), y1 = 0;
  for (const auto& p : pts) y0 = std::min(y0, std::log10(p.survival));
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y0 = y1 - 1;
  auto sx = [&](double lr) { return margin + (lr - x0) / (x1 - x0) * (w - 2 * margin); };
  auto sy = [&](double ls) { return h - margin - (ls - y0) / (y1 - y0) * (h - 2 * margin); };
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
                margin, margin, w - 2 * margin, h - 2 * margin);
  out << buf;
  for (int e = static_cast<int>(std::ceil(x0)); e <= static_cast<int>(std::floor(x1)); ++e) {
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\">1e%d</text>\n",
                  sx(e) - 10, h - margin + 16, e);
    out << buf;
  }
  for (int e = static_cast<int>(std::ceil(y0)); e <= 0; ++e) {
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\">1e%d</text>\n",
                  margin - 44, sy(e) + 4, e);
    out << buf;
  }
  out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (const auto& p : pts) {
    std::snprintf(buf, sizeof buf, "%.2f,%.2f ", sx(std::log10(p.r)), sy(std::log10(p.survival)));
    out << buf;
  }
  out << "\"/>\n";
  if (tail.fit) {
    const auto& f = *tail.fit;
    auto line_y = [&](double r) { return (f.intercept - f.exponent * std::log(r)) / std::log(10.0); };
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#d62728\" "
                  "stroke-dasharray=\"6,3\"/>\n",
                  sx(std::log10(f.r_min)), sy(line_y(f.r_min)), sx(std::log10(f.r_max)), sy(line_y(f.r_max)));
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"44\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#d62728\">"
                  "fitted exponent %.3f +/- %.3f on [%.3g, %.3g]</text>\n",
                  margin, f.exponent, f.std_error, f.r_min, f.r_max);
    out << buf;
  }
  out << "</svg>\n";
}

bool InvariantReport::all_hard_passed() const {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed || !r.hard; });
}

const InvariantResult* InvariantReport::find(const std::string& name) const {
  for (const auto& r : results)
    if (r.name == name) return &r;
  return nullptr;
}

namespace {

std::string pair_text(std::uint32_t i, std::uint32_t j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

}  // namespace

InvariantReport invariant_report(const ColoredPointSet& points, const Matching& m,
                                 const InvariantOptions& options) {
  InvariantReport report;
  auto add = [&](std::string name, bool ok, std::string detail, bool hard = true) {
    report.results.push_back({std::move(name), ok, hard, std::move(detail)});
  };

  try {
    validate_matching(points, m);
    add("coverage", true, "");
  } catch (const std::logic_error& e) {
    add("coverage", false, e.what());
    return report;
  }

  const std::size_t matched_points = 2 * m.pairs.size();
  if (m.mode == MatchMode::TwoColor) {
    std::size_t red = 0, blue = 0;
    for (const Pair& p : m.pairs) {
      ++(points.color(p.a) == Color::Red ? red : blue);
      ++(points.color(p.b) == Color::Red ? red : blue);
    }
    add("fairness", red == blue,
        "matched red=" + std::to_string(red) + " matched blue=" + std::to_string(blue));
    if (options.scheme != Scheme::Adjacent) {
      const std::size_t r_all = points.count(Color::Red), b_all = points.count(Color::Blue);
      const std::size_t gap = r_all > b_all ? r_all - b_all : b_all - r_all;
      bool one_color = true;
      for (auto u : m.unmatched) one_color = one_color && points.color(u) == points.color(m.unmatched.front());
      add("unmatched_single_color", one_color && m.unmatched.size() == gap,
          "unmatched=" + std::to_string(m.unmatched.size()) + " |#R-#B|=" + std::to_string(gap));
    }
  }
  (void)matched_points;

  switch (options.scheme) {
    case Scheme::Stable: {
      std::optional<UnstablePair> w;
      if (points.size() <= options.quadratic_check_limit) w = find_unstable_pair(points, m);
      else w = find_unstable_pair_indexed(points, m);
      add("no_unstable_pair", !w, w ? "unstable pair " + pair_text(w->i, w->j) : "");
      if (m.mode == MatchMode::OneColor)
        add("one_color_unmatched_at_most_one", m.unmatched.size() <= 1,
            "unmatched=" + std::to_string(m.unmatched.size()));
      std::vector<double> grid = options.t_grid;
      if (grid.empty()) {
        const double spacing = std::pow(points.domain().volume() / std::max<double>(1.0, points.size()),
                                        1.0 / points.dim());
        double top = 0;
        for (const Pair& p : m.pairs) top = std::max(top, points.distance(p.a, p.b));
        top = std::min(top, points.domain().side() / 4);
        if (top > 0.25 * spacing) grid = log_grid(0.25 * spacing, top, 20);
      }
      std::string detail;
      bool ok = true;
      for (double t : grid) {
        if (auto v = find_bad_separation_violation(points, m, t)) {
          ok = false;
          detail = "t=" + std::to_string(t) + " bad pair " + pair_text(v->i, v->j);
          break;
        }
      }
      add("t_bad_separation", ok, ok ? std::to_string(grid.size()) + " thresholds" : detail);
      break;
    }
    case Scheme::Hierarchical: {
      bool ok = m.pair_level.size() == m.pairs.size();
      std::string detail = ok ? "" : "missing level annotation";
      const double root_d = std::sqrt(static_cast<double>(points.dim()));
      for (std::size_t k = 0; ok && k < m.pairs.size(); ++k) {
        const double bound = std::ldexp(root_d, m.pair_level[k]);
        const double dist = points.distance(m.pairs[k].a, m.pairs[k].b);
        if (dist > bound) {
          ok = false;
          detail = "pair " + pair_text(m.pairs[k].a, m.pairs[k].b) + " at level " +
                   std::to_string(m.pair_level[k]) + " has length " + std::to_string(dist);
        }
      }
      add("level_diameter_bound", ok, detail);
      break;
    }
    case Scheme::Adjacent: {
      std::vector<std::uint32_t> order(points.size());
      for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](auto a, auto b) {
        const double xa = points.point(a)[0], xb = points.point(b)[0];
        return xa != xb ? xa < xb : a < b;
      });
      std::vector<std::size_t> rank(points.size());
      for (std::size_t k = 0; k < order.size(); ++k) rank[order[k]] = k;
      const std::size_t n = points.size();
      bool ok = true;
      std::string detail;
      for (const Pair& p : m.pairs) {
        const std::size_t ra = rank[p.a], rb = rank[p.b];
        const bool next = (ra + 1) % n == rb || (rb + 1) % n == ra;
        if (!next) {
          ok = false;
          detail = "pair " + pair_text(p.a, p.b) + " is not adjacent";
          break;
        }
      }
      add("adjacent_pairs", ok, detail);
      break;
    }
    case Scheme::Msf:
    case Scheme::Cone: {
      if (!options.forest) {
        add("forest_distance_le_2", false, "no forest supplied");
        break;
      }
      bool ok = true;
      std::string detail;
      for (const Pair& p : m.pairs)
        if (forest_distance_capped(*options.forest, p.a, p.b) > 2) {
          ok = false;
          detail = "pair " + pair_text(p.a, p.b) + " is more than 2 forest steps apart";
          break;
        }
      add("forest_distance_le_2", ok, detail);
      break;
    }
    case Scheme::MinLength:
      break;
  }
  return report;
}

}  // namespace pm
