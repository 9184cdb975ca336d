#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

#include "pointmatch/analysis.hpp"
#include "pointmatch/constructions.hpp"
#include "pointmatch/errors.hpp"
#include "pointmatch/experiment.hpp"
#include "pointmatch/exponent.hpp"
#include "pointmatch/oracles.hpp"
#include "pointmatch/stable.hpp"

namespace py = pybind11;
using namespace pm;

namespace {

Color parse_color(const std::string& s) {
  if (s == "red") return Color::Red;
  if (s == "blue") return Color::Blue;
  throw py::value_error("color must be 'red' or 'blue'");
}

py::array_t<double> to_numpy(const std::vector<double>& v) {
  py::array_t<double> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::array_t<double> coords_array(const ColoredPointSet& p) {
  py::array_t<double> out({static_cast<py::ssize_t>(p.size()), static_cast<py::ssize_t>(p.dim())});
  std::copy(p.coords().begin(), p.coords().end(), out.mutable_data());
  return out;
}

py::array_t<std::uint32_t> pairs_array(const Matching& m) {
  py::array_t<std::uint32_t> out({static_cast<py::ssize_t>(m.pairs.size()), py::ssize_t{2}});
  auto* d = out.mutable_data();
  for (const Pair& p : m.pairs) {
    *d++ = p.a;
    *d++ = p.b;
  }
  return out;
}

ColoredPointSet from_arrays(const Domain& dom, py::array_t<double, py::array::c_style | py::array::forcecast> coords,
                            const std::vector<std::string>& colors) {
  if (coords.ndim() != 2 || coords.shape(1) != dom.dim())
    throw py::value_error("coords must have shape (n, d)");
  const auto n = static_cast<std::size_t>(coords.shape(0));
  if (colors.size() != n && !colors.empty()) throw py::value_error("colors must match the number of points");
  ColoredPointSet out(dom);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(std::span<const double>(coords.data() + i * dom.dim(), dom.dim()),
                  colors.empty() ? Color::Red : parse_color(colors[i]));
  return out;
}

py::dict fit_dict(const PowerLawFit& f) {
  py::dict d;
  d["exponent"] = f.exponent;
  d["intercept"] = f.intercept;
  d["std_error"] = f.std_error;
  d["residual_std_error"] = f.residual_std_error;
  d["r_min"] = f.r_min;
  d["r_max"] = f.r_max;
  d["points"] = f.points;
  d["curvature"] = f.curvature;
  d["nonlinear"] = f.nonlinear();
  return d;
}

std::optional<std::pair<std::uint32_t, std::uint32_t>> as_tuple(const std::optional<UnstablePair>& u) {
  if (!u) return std::nullopt;
  return std::make_pair(u->i, u->j);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Geometric matchings of random point sets";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CapabilityError>(m, "CapabilityError", PyExc_RuntimeError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::class_<Domain>(m, "Domain")
      .def(py::init([](int d, double side, const std::string& boundary) {
             return Domain(d, side, parse_boundary(boundary));
           }),
           py::arg("d"), py::arg("side"), py::arg("boundary") = "torus")
      .def_property_readonly("d", &Domain::dim)
      .def_property_readonly("side", &Domain::side)
      .def_property_readonly("boundary", [](const Domain& d) { return to_string(d.boundary()); })
      .def("distance", [](const Domain& d, std::vector<double> x, std::vector<double> y) {
        return d.distance(x, y);
      });

  py::class_<ColoredPointSet>(m, "PointSet")
      .def(py::init(&from_arrays), py::arg("domain"), py::arg("coords"), py::arg("colors") = std::vector<std::string>{})
      .def_property_readonly("domain", &ColoredPointSet::domain)
      .def_property_readonly("coords", &coords_array)
      .def_property_readonly("colors",
                             [](const ColoredPointSet& p) {
                               std::vector<std::string> out;
                               out.reserve(p.size());
                               for (Color c : p.colors()) out.emplace_back(c == Color::Red ? "red" : "blue");
                               return out;
                             })
      .def_property_readonly("seed", &ColoredPointSet::seed)
      .def("__len__", &ColoredPointSet::size)
      .def("count", [](const ColoredPointSet& p, const std::string& c) { return p.count(parse_color(c)); });

  py::class_<Matching>(m, "Matching")
      .def_property_readonly("mode", [](const Matching& x) { return to_string(x.mode); })
      .def_property_readonly("pairs", &pairs_array)
      .def_readonly("unmatched", &Matching::unmatched)
      .def_readonly("pair_level", &Matching::pair_level)
      .def_readonly("approximate", &Matching::approximate)
      .def("__len__", [](const Matching& x) { return x.pairs.size(); });

  py::class_<Forest>(m, "Forest")
      .def_readonly("parent", &Forest::parent)
      .def_readonly("roots", &Forest::roots)
      .def("__len__", &Forest::size);

  m.def(
      "sample_poisson",
      [](const Domain& dom, double intensity, const std::string& color, std::uint64_t seed) {
        return sample_poisson(dom, intensity, parse_color(color), seed);
      },
      py::arg("domain"), py::arg("intensity") = 1.0, py::arg("color") = "red", py::arg("seed") = 0);
  m.def(
      "sample_binomial",
      [](const Domain& dom, std::size_t n, const std::string& color, std::uint64_t seed) {
        return sample_binomial(dom, n, parse_color(color), seed);
      },
      py::arg("domain"), py::arg("n"), py::arg("color") = "red", py::arg("seed") = 0);
  m.def("merge", &merge);

  m.def(
      "stable_match",
      [](const ColoredPointSet& p, const std::string& mode) { return stable_match(p, parse_match_mode(mode)); },
      py::arg("points"), py::arg("mode") = "two-color", py::call_guard<py::gil_scoped_release>());
  m.def("find_unstable_pair", [](const ColoredPointSet& p, const Matching& x) {
    return as_tuple(p.size() <= 3000 ? find_unstable_pair(p, x) : find_unstable_pair_indexed(p, x));
  });
  m.def("find_bad_separation_violation", [](const ColoredPointSet& p, const Matching& x, double t) {
    return as_tuple(find_bad_separation_violation(p, x, t));
  });
  m.def(
      "hierarchical_match",
      [](const ColoredPointSet& p, std::uint64_t seed) {
        const int top = dyadic_top_level(p.domain());
        return hierarchical_match(p, DyadicShifts::random(p.dim(), top, seed)).matching;
      },
      py::arg("points"), py::arg("seed") = 0, py::call_guard<py::gil_scoped_release>());
  m.def("adjacent_match_1d", &adjacent_match_1d, py::arg("points"), py::arg("coin") = false);
  m.def("minimal_spanning_forest", &minimal_spanning_forest, py::call_guard<py::gil_scoped_release>());
  m.def("cone_forest", &cone_forest, py::call_guard<py::gil_scoped_release>());
  m.def("match_from_forest", &match_from_forest);
  m.def("min_length_bipartite", py::overload_cast<const ColoredPointSet&>(&min_length_bipartite));
  m.def("min_length_one_color_exact", &min_length_one_color_exact);
  m.def("min_length_one_color_greedy", &min_length_one_color_greedy);
  m.def("total_length", &total_length);
  m.def("validate_matching", &validate_matching);

  m.def(
      "match_distances",
      [](const ColoredPointSet& p, const Matching& x, bool per_pair, double margin) {
        auto s = match_distances(p, x, per_pair ? SampleMode::PerPair : SampleMode::PerEndpoint, margin);
        return py::make_tuple(to_numpy(s.values), s.censored);
      },
      py::arg("points"), py::arg("matching"), py::arg("per_pair") = false, py::arg("interior_margin") = 0.0);
  m.def(
      "empirical_survival",
      [](std::vector<double> samples, std::vector<double> grid, std::size_t censored) {
        std::vector<double> out;
        for (const auto& sp : empirical_survival(samples, grid, censored)) out.push_back(sp.survival);
        return out;
      },
      py::arg("samples"), py::arg("grid"), py::arg("censored") = 0);
  m.def("log_grid", &log_grid);
  m.def(
      "fit_tail",
      [](std::vector<double> samples, std::size_t censored, double r_min, double r_max, std::size_t grid_points) {
        const auto grid = log_grid(r_min, r_max, grid_points);
        const auto curve = empirical_survival(samples, grid, censored);
        return fit_dict(fit_power_law(curve, r_min, r_max, samples.size() + censored));
      },
      py::arg("samples"), py::arg("censored") = 0, py::arg("r_min"), py::arg("r_max"), py::arg("grid_points") = 48);
  m.def(
      "ks_exponential",
      [](std::vector<double> samples, double rate) {
        const auto r = ks_exponential(samples, rate);
        return py::make_tuple(r.statistic, r.p_value);
      },
      py::arg("samples"), py::arg("rate") = 1.0);

  m.def(
      "solve_s",
      [](int d, double tol) {
        const auto sol = solve_s(d, tol);
        py::dict out;
        out["d"] = sol.d;
        out["s"] = sol.s;
        out["residual"] = sol.residual;
        out["evaluations"] = sol.evaluations;
        return out;
      },
      py::arg("d"), py::arg("tol") = 1e-6);
  m.def("phi", &phi, py::arg("s"), py::arg("d"), py::arg("tol") = 1e-12);
  m.def("kernel_g", &kernel_g);
  m.def("sphere_area", &sphere_area);

  m.def(
      "run_config",
      [](const std::string& text, const std::filesystem::path& out_dir, unsigned workers) {
        return run_plan(parse_run_config(text), out_dir, workers == 0 ? default_workers() : workers);
      },
      py::arg("config"), py::arg("out_dir"), py::arg("workers") = 0, py::call_guard<py::gil_scoped_release>());
  m.def(
      "oracle_suite",
      [](int seeds) {
        py::list out;
        for (const auto& c : oracle_suite({Strictness::Strict, seeds}))
          out.append(py::make_tuple(c.name, c.passed, c.detail));
        return out;
      },
      py::arg("seeds") = 100);
}
