#include "pointmatch/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "pointmatch/errors.hpp"
#include "pointmatch/exponent.hpp"
#include "pointmatch/oracles.hpp"
#include "pointmatch/random.hpp"

namespace pm {

using nlohmann::json;

namespace {

const std::set<std::string> kCellKeys{"scheme", "mode", "d", "L", "intensity", "trials", "boundary",
                                      "seed", "interior_margin", "samples", "fit", "tol"};

[[noreturn]] void schema_error(std::size_t cell, const std::string& what) {
  throw ConfigError("experiment " + std::to_string(cell) + ": " + what);
}

double read_side(const json& v, std::size_t cell) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.size() > 2 && s.rfind("2^", 0) == 0) {
      try {
        std::size_t used = 0;
        const int k = std::stoi(s.substr(2), &used);
        if (used == s.size() - 2 && k >= 0 && k <= 60) return std::ldexp(1.0, k);
      } catch (const std::exception&) {
      }
    }
  }
  schema_error(cell, "L must be a positive number or a string \"2^k\"");
}

template <class T>
T read_number(const json& obj, const char* key, T fallback, std::size_t cell) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) schema_error(cell, std::string(key) + " must be an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_unsigned()) return v.get<T>();
      if (v.get<std::int64_t>() < 0) schema_error(cell, std::string(key) + " must be non-negative");
    }
  } else {
    if (!v.is_number()) schema_error(cell, std::string(key) + " must be a number");
  }
  return v.get<T>();
}

std::string read_string(const json& obj, const char* key, std::size_t cell) {
  const auto& v = obj.at(key);
  if (!v.is_string()) schema_error(cell, std::string(key) + " must be a string");
  return v.get<std::string>();
}

MatchMode default_mode(Scheme s) {
  switch (s) {
    case Scheme::Adjacent:
    case Scheme::Msf:
    case Scheme::Cone: return MatchMode::OneColor;
    default: return MatchMode::TwoColor;
  }
}

std::string sample_mode_name(SampleMode m) {
  return m == SampleMode::PerPair ? "per-pair" : "per-endpoint";
}

ExponentConfig parse_exponent_cell(const json& obj, std::size_t cell) {
  ExponentConfig e;
  if (!obj.contains("d")) schema_error(cell, "solve-s needs d (an integer or a list of integers)");
  const auto& d = obj.at("d");
  auto push = [&](const json& v) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1 || v.get<std::int64_t>() > 1000000)
      schema_error(cell, "solve-s dimensions must be integers in [1, 10^6]");
    e.dims.push_back(v.get<int>());
  };
  if (d.is_array()) {
    for (const auto& v : d) push(v);
  } else {
    push(d);
  }
  e.tol = read_number<double>(obj, "tol", 1e-6, cell);
  if (!(e.tol > 0)) schema_error(cell, "tol must be positive");
  for (const auto& [k, v] : obj.items())
    if (k != "scheme" && k != "d" && k != "tol") schema_error(cell, "unknown key '" + k + "' for solve-s");
  json canon{{"scheme", "solve-s"}, {"d", e.dims}, {"tol", e.tol}};
  e.canonical = canon.dump();
  return e;
}

ExperimentConfig parse_cell(const json& obj, std::size_t cell) {
  for (const auto& [k, v] : obj.items())
    if (!kCellKeys.count(k) || k == "tol") schema_error(cell, "unknown key '" + k + "'");
  ExperimentConfig c;
  try {
    c.scheme = parse_scheme(read_string(obj, "scheme", cell));
    c.mode = obj.contains("mode") ? parse_match_mode(read_string(obj, "mode", cell)) : default_mode(c.scheme);
    c.boundary = obj.contains("boundary") ? parse_boundary(read_string(obj, "boundary", cell))
                 : c.scheme == Scheme::Cone ? Boundary::Box
                                            : Boundary::Torus;
    if (obj.contains("samples")) {
      const auto s = read_string(obj, "samples", cell);
      if (s == "per-pair") c.sample_mode = SampleMode::PerPair;
      else if (s == "per-endpoint") c.sample_mode = SampleMode::PerEndpoint;
      else schema_error(cell, "samples must be per-endpoint or per-pair");
    }
  } catch (const std::invalid_argument& e) {
    schema_error(cell, e.what());
  }
  if (!obj.contains("d")) schema_error(cell, "missing d");
  c.dim = read_number<int>(obj, "d", 1, cell);
  if (c.dim < 1 || c.dim > 16) schema_error(cell, "d must be in [1, 16]");
  if (!obj.contains("L")) schema_error(cell, "missing L");
  c.side = read_side(obj.at("L"), cell);
  if (!(c.side > 0) || !std::isfinite(c.side)) schema_error(cell, "L must be positive");
  c.intensity = read_number<double>(obj, "intensity", 1.0, cell);
  if (!(c.intensity > 0) || !std::isfinite(c.intensity)) schema_error(cell, "intensity must be positive");
  c.trials = read_number<int>(obj, "trials", 1, cell);
  if (c.trials < 1) schema_error(cell, "trials must be >= 1");
  c.seed = read_number<std::uint64_t>(obj, "seed", 0, cell);
  c.interior_margin = read_number<double>(obj, "interior_margin", 0.0, cell);
  if (!(c.interior_margin >= 0)) schema_error(cell, "interior_margin must be >= 0");
  if (obj.contains("fit")) {
    const auto& f = obj.at("fit");
    if (f.is_string() && f.get<std::string>() == "auto") {
    } else if (f.is_object()) {
      for (const auto& [k, v] : f.items())
        if (k != "r_min" && k != "r_max") schema_error(cell, "unknown fit key '" + k + "'");
      if (!f.contains("r_min") || !f.contains("r_max")) schema_error(cell, "fit needs r_min and r_max");
      FitWindow w{read_number<double>(f, "r_min", 0, cell), read_number<double>(f, "r_max", 0, cell)};
      if (!(w.r_min > 0 && w.r_max > w.r_min)) schema_error(cell, "fit needs 0 < r_min < r_max");
      c.fit = w;
    } else {
      schema_error(cell, "fit must be \"auto\" or {r_min, r_max}");
    }
  }
  json canon{{"scheme", to_string(c.scheme)},
             {"mode", to_string(c.mode)},
             {"d", c.dim},
             {"L", c.side},
             {"intensity", c.intensity},
             {"trials", c.trials},
             {"boundary", to_string(c.boundary)},
             {"seed", c.seed},
             {"interior_margin", c.interior_margin},
             {"samples", sample_mode_name(c.sample_mode)}};
  canon["fit"] = c.fit ? json{{"r_min", c.fit->r_min}, {"r_max", c.fit->r_max}} : json("auto");
  c.canonical = canon.dump();
  return c;
}

double expected_points(const ExperimentConfig& c) {
  return c.intensity * std::pow(c.side, c.dim) * (c.mode == MatchMode::TwoColor ? 2 : 1);
}

}  // namespace

RunPlan parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  std::vector<json> cells;
  if (doc.is_object() && doc.contains("experiments")) {
    if (doc.size() != 1) throw ConfigError("top level may only hold \"experiments\"");
    if (!doc.at("experiments").is_array() || doc.at("experiments").empty())
      throw ConfigError("\"experiments\" must be a nonempty array");
    for (const auto& c : doc.at("experiments")) cells.push_back(c);
  } else {
    cells.push_back(doc);
  }
  RunPlan plan;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    if (!c.is_object()) schema_error(i, "must be a JSON object");
    if (!c.contains("scheme")) schema_error(i, "missing scheme");
    if (c.at("scheme").is_string() && c.at("scheme").get<std::string>() == "solve-s")
      plan.exponent_cells.push_back(parse_exponent_cell(c, i));
    else
      plan.cells.push_back(parse_cell(c, i));
  }
  return plan;
}

void check_capability(const ExperimentConfig& c) {
  const std::string tag = to_string(c.scheme) + ": ";
  const bool one = c.mode == MatchMode::OneColor;
  if (expected_points(c) > 4e7)
    throw CapabilityError(tag + "expected point count " + std::to_string(expected_points(c)) +
                          " exceeds the 4e7 per-trial limit");
  switch (c.scheme) {
    case Scheme::Stable: break;
    case Scheme::Hierarchical: {
      if (one) throw CapabilityError(tag + "two-color only");
      if (c.boundary != Boundary::Torus) throw CapabilityError(tag + "needs a torus");
      int e = 0;
      if (std::frexp(c.side, &e) != 0.5) throw CapabilityError(tag + "needs L = 2^K");
      break;
    }
    case Scheme::Adjacent:
      if (!one || c.dim != 1 || c.boundary != Boundary::Torus)
        throw CapabilityError(tag + "one-color, d = 1, torus only");
      break;
    case Scheme::Msf:
      if (!one) throw CapabilityError(tag + "one-color only");
      break;
    case Scheme::Cone:
      if (!one || c.dim < 2 || c.boundary != Boundary::Box)
        throw CapabilityError(tag + "one-color, d >= 2, box only");
      break;
    case Scheme::MinLength:
      if (one && expected_points(c) > 16)
        throw CapabilityError(tag + "one-color exact matching is limited to n <= 20");
      if (!one && expected_points(c) > 6000)
        throw CapabilityError(tag + "assignment solver is limited to about 3000 points per color");
      break;
  }
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t trial_seed(const ExperimentConfig& cfg, int trial) {
  return derive_seed(cfg.seed, 0, static_cast<std::uint64_t>(trial));
}

ColoredPointSet sample_trial_points(const ExperimentConfig& cfg, int trial) {
  const std::uint64_t s = trial_seed(cfg, trial);
  const Domain dom(cfg.dim, cfg.side, cfg.boundary);
  auto red = sample_poisson(dom, cfg.intensity, Color::Red, derive_seed(s, 1, 0));
  if (cfg.mode == MatchMode::OneColor) return red;
  auto blue = sample_poisson(dom, cfg.intensity, Color::Blue, derive_seed(s, 2, 0));
  return merge(red, blue);
}

Matching build_matching(const ExperimentConfig& cfg, const ColoredPointSet& points, std::uint64_t seed,
                        std::optional<Forest>* forest) {
  switch (cfg.scheme) {
    case Scheme::Stable: return stable_match(points, cfg.mode);
    case Scheme::Hierarchical: {
      const int top = dyadic_top_level(points.domain());
      return hierarchical_match(points, DyadicShifts::random(points.dim(), top, seed)).matching;
    }
    case Scheme::Adjacent: return adjacent_match_1d(points, (splitmix64(seed) & 1) != 0);
    case Scheme::Msf:
    case Scheme::Cone: {
      if (points.empty()) return Matching{};
      Forest f = cfg.scheme == Scheme::Msf ? minimal_spanning_forest(points) : cone_forest(points);
      Matching m = match_from_forest(f);
      if (forest) *forest = std::move(f);
      return m;
    }
    case Scheme::MinLength:
      return cfg.mode == MatchMode::TwoColor ? min_length_bipartite(points) : min_length_one_color_exact(points);
  }
  throw std::logic_error("unhandled scheme");
}

TrialResult run_trial(const ExperimentConfig& cfg, int trial) {
  TrialResult r;
  r.trial = trial;
  r.seed = trial_seed(cfg, trial);
  r.points = sample_trial_points(cfg, trial);
  r.n_points = r.points.size();
  r.matching = build_matching(cfg, r.points, derive_seed(r.seed, 3, 0), &r.forest);
  InvariantOptions opt;
  opt.scheme = cfg.scheme;
  opt.forest = r.forest ? &*r.forest : nullptr;
  r.report = invariant_report(r.points, r.matching, opt);
  r.samples = match_distances(r.points, r.matching, cfg.sample_mode, cfg.interior_margin);
  return r;
}

unsigned default_workers() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PM_WORKERS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

CellResult run_cell(const ExperimentConfig& cfg, unsigned workers) {
  check_capability(cfg);
  const int n = cfg.trials;
  std::vector<std::optional<TrialResult>> results(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (int t; (t = next.fetch_add(1)) < n;) {
      try {
        auto r = run_trial(cfg, t);
        if (t != 0 && r.report.all_hard_passed()) {
          // Only the first trial and failing trials keep their geometry.
          r.points = ColoredPointSet(Domain(1, 1.0));
          r.matching = Matching{};
          r.forest.reset();
        }
        results[static_cast<std::size_t>(t)] = std::move(r);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  CellResult out;
  out.config = cfg;
  TailAccumulator acc;
  std::map<std::string, std::pair<std::size_t, bool>> tallies;
  std::vector<std::string> order;
  for (auto& slot : results) {
    TrialResult& r = *slot;
    out.seeds.push_back(r.seed);
    acc.add(r.samples, r.n_points);
    for (const auto& inv : r.report.results) {
      auto [it, fresh] = tallies.try_emplace(inv.name, 0, inv.hard);
      if (fresh) order.push_back(inv.name);
      if (inv.passed) ++it->second.first;
    }
    if (!r.report.all_hard_passed()) out.failures.push_back(r);
    if (r.trial == 0) out.first = std::move(r);
  }
  for (const auto& name : order) {
    const auto& [passed, hard] = tallies[name];
    out.invariant_totals.push_back({name, passed == static_cast<std::size_t>(n), hard,
                                    std::to_string(passed) + "/" + std::to_string(n) + " trials"});
  }
  out.window = cfg.fit ? *cfg.fit
                       : default_fit_window(acc.samples, acc.censored,
                                            poisson_mean_nn_distance(cfg.dim, cfg.intensity), cfg.side);
  out.tail = make_tail_estimate(std::move(acc), out.window);
  out.tail.scheme = to_string(cfg.scheme) + "/" + to_string(cfg.mode);
  char dom[96];
  std::snprintf(dom, sizeof dom, "%s d=%d L=%g intensity=%g", to_string(cfg.boundary).c_str(), cfg.dim,
                cfg.side, cfg.intensity);
  out.tail.domain = dom;
  return out;
}

namespace {

json report_json(const std::vector<InvariantResult>& results) {
  json a = json::array();
  for (const auto& r : results)
    a.push_back({{"name", r.name}, {"passed", r.passed}, {"hard", r.hard}, {"detail", r.detail}});
  return a;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

template <class Writer>
void write_with(const std::filesystem::path& p, Writer&& w) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  w(f);
}

std::string cell_name(std::size_t idx, const ExperimentConfig& c) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%02zu_%s_%s_d%d", idx, to_string(c.scheme).c_str(), to_string(c.mode).c_str(),
                c.dim);
  return buf;
}

json fit_json(const TailEstimate& t) {
  if (!t.fit) return nullptr;
  const auto& f = *t.fit;
  return {{"exponent", f.exponent},   {"intercept", f.intercept}, {"stderr", f.std_error},
          {"residual_stderr", f.residual_std_error},
          {"r_min", f.r_min},         {"r_max", f.r_max},         {"grid_points", f.points},
          {"curvature", f.curvature}, {"curvature_stderr", f.curvature_stderr},
          {"nonlinear", f.nonlinear()}};
}

struct ExponentTable {
  ExponentConfig config;
  std::vector<ExponentSolution> rows;
};

void write_cell(const std::filesystem::path& dir, const CellResult& r, json& summary) {
  std::filesystem::create_directories(dir);
  const std::string hash = fnv1a_hex(r.config.canonical);
  write_text(dir / "config.json", json::parse(r.config.canonical).dump(2) + "\n");
  write_with(dir / "tail.csv", [&](std::ostream& o) { write_tail_csv(o, r.tail); });
  write_with(dir / "tail.svg", [&](std::ostream& o) {
    write_tail_svg(o, r.tail, r.tail.scheme + " (" + r.tail.domain + "), " + std::to_string(r.tail.trials) +
                                  " trials");
  });
  json tail{{"config_hash", hash},
            {"config", json::parse(r.config.canonical)},
            {"scheme", r.tail.scheme},
            {"domain", r.tail.domain},
            {"trials", r.tail.trials},
            {"points", r.tail.points},
            {"samples", r.tail.samples.size()},
            {"censored", r.tail.censored},
            {"fit_window", {{"r_min", r.window.r_min}, {"r_max", r.window.r_max}}},
            {"fit", fit_json(r.tail)},
            {"seeds", r.seeds}};
  write_text(dir / "tail.json", tail.dump(2) + "\n");

  json failures = json::array();
  for (const auto& f : r.failures) {
    const std::string stem = "witness_trial" + std::to_string(f.trial);
    write_with(dir / (stem + "_points.csv"), [&](std::ostream& o) { write_points_csv(o, f.points); });
    write_with(dir / (stem + "_matching.csv"),
               [&](std::ostream& o) { write_matching_csv(o, f.points, f.matching); });
    failures.push_back({{"trial", f.trial}, {"seed", f.seed}, {"results", report_json(f.report.results)},
                        {"points_file", stem + "_points.csv"}, {"matching_file", stem + "_matching.csv"}});
  }
  json inv{{"config_hash", hash}, {"totals", report_json(r.invariant_totals)}, {"failures", failures}};
  write_text(dir / "invariants.json", inv.dump(2) + "\n");

  if (r.first && r.first->points.size() <= 200000) {
    write_with(dir / "sample_points.csv", [&](std::ostream& o) { write_points_csv(o, r.first->points); });
    write_with(dir / "sample_matching.csv",
               [&](std::ostream& o) { write_matching_csv(o, r.first->points, r.first->matching); });
    if (r.first->forest)
      write_with(dir / "sample_forest.csv", [&](std::ostream& o) { write_forest_csv(o, *r.first->forest); });
  }
  summary.push_back({{"name", dir.filename().string()},
                     {"config_hash", hash},
                     {"fit", fit_json(r.tail)},
                     {"invariants_passed", r.failures.empty()}});
}

void write_exponents(const std::filesystem::path& dir, const ExponentTable& t, json& summary) {
  std::filesystem::create_directories(dir);
  const std::string hash = fnv1a_hex(t.config.canonical);
  write_with(dir / "exponents.csv", [&](std::ostream& o) {
    o << "d,s,s_log_d,residual,evaluations\n";
    char buf[160];
    for (const auto& s : t.rows) {
      std::snprintf(buf, sizeof buf, "%d,%.10f,%.10f,%.3e,%zu\n", s.d, s.s, s.s * std::log(double(s.d)),
                    s.residual, s.evaluations);
      o << buf;
    }
  });
  json rows = json::array();
  for (const auto& s : t.rows)
    rows.push_back({{"d", s.d}, {"s", s.s}, {"residual", s.residual}, {"evaluations", s.evaluations}});
  write_text(dir / "exponents.json", json{{"config_hash", hash}, {"rows", rows}}.dump(2) + "\n");
  summary.push_back({{"name", dir.filename().string()}, {"config_hash", hash}, {"rows", rows}});
}

int write_plan(const RunPlan& plan, const std::vector<CellResult>& cells, const std::vector<ExponentTable>& tables,
               const std::filesystem::path& out_dir, unsigned workers) {
  std::filesystem::create_directories(out_dir);
  json summary = json::array();
  bool ok = true;
  std::size_t idx = 0;
  for (const auto& c : cells) {
    write_cell(out_dir / cell_name(idx++, c.config), c, summary);
    ok = ok && c.failures.empty();
  }
  for (const auto& t : tables) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02zu_solve-s", idx++);
    write_exponents(out_dir / buf, t, summary);
  }
  json all_configs = json::array();
  for (const auto& c : plan.cells) all_configs.push_back(json::parse(c.canonical));
  for (const auto& c : plan.exponent_cells) all_configs.push_back(json::parse(c.canonical));
  write_text(out_dir / "summary.json",
             json{{"config_hash", fnv1a_hex(all_configs.dump())}, {"cells", summary}, {"ok", ok}}.dump(2) + "\n");
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[64];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  write_text(out_dir / "metadata.json", json{{"created", stamp}, {"workers", workers}}.dump(2) + "\n");
  return ok ? 0 : 1;
}

}  // namespace

int run_plan(const RunPlan& plan, const std::filesystem::path& out_dir, unsigned workers) {
  for (const auto& c : plan.cells) check_capability(c);
  // Everything is computed before the first file is written.
  std::vector<CellResult> cells;
  for (const auto& c : plan.cells) cells.push_back(run_cell(c, workers));
  std::vector<ExponentTable> tables;
  for (const auto& e : plan.exponent_cells) {
    ExponentTable t{e, {}};
    for (int d : e.dims) t.rows.push_back(solve_s(d, e.tol));
    tables.push_back(std::move(t));
  }
  return write_plan(plan, cells, tables, out_dir, workers);
}

int run_config_file(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                    unsigned workers) {
  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + config_path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const RunPlan plan = parse_run_config(ss.str());
    const int rc = run_plan(plan, out_dir, workers);
    if (rc != 0) std::cerr << "hard invariant failure; witnesses written under " << out_dir.string() << "\n";
    return rc;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const CapabilityError& e) {
    std::cerr << "capability error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace pm
