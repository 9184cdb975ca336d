#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "pointmatch/errors.hpp"
#include "pointmatch/experiment.hpp"

using namespace pm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("pm_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  return out;
}

int run_text(const TempDir& tmp, const std::string& config, const std::string& out, unsigned workers = 2) {
  const auto cfg = tmp.path / (out + ".json");
  write_file(cfg, config);
  return run_config_file(cfg, tmp.path / out, workers);
}

}  // namespace

TEST_CASE("config parsing") {
  const auto plan = parse_run_config(R"({"scheme":"stable","d":2,"L":"2^5","trials":3,"seed":9})");
  REQUIRE(plan.cells.size() == 1);
  const auto& c = plan.cells[0];
  CHECK(c.scheme == Scheme::Stable);
  CHECK(c.mode == MatchMode::TwoColor);
  CHECK(c.dim == 2);
  CHECK(c.side == 32.0);
  CHECK(c.trials == 3);
  CHECK(c.boundary == Boundary::Torus);

  const auto cone = parse_run_config(R"({"scheme":"cone","d":3,"L":10,"trials":1})");
  CHECK(cone.cells[0].mode == MatchMode::OneColor);
  CHECK(cone.cells[0].boundary == Boundary::Box);

  const auto multi = parse_run_config(
      R"({"experiments":[{"scheme":"adjacent","d":1,"L":100,"trials":2},{"scheme":"solve-s","d":[2,3]}]})");
  CHECK(multi.cells.size() == 1);
  REQUIRE(multi.exponent_cells.size() == 1);
  CHECK(multi.exponent_cells[0].dims == std::vector<int>{2, 3});

  const auto fit = parse_run_config(R"({"scheme":"stable","d":1,"L":64,"fit":{"r_min":2,"r_max":8}})");
  REQUIRE(fit.cells[0].fit.has_value());
  CHECK(fit.cells[0].fit->r_max == 8.0);

  // Canonical text does not depend on key order or spacing.
  CHECK(parse_run_config(R"({"d":2,"scheme":"stable","L":8})").cells[0].canonical ==
        parse_run_config(R"({ "scheme" : "stable", "L" : 8, "d" : 2 })").cells[0].canonical);
}

TEST_CASE("schema violations are config errors") {
  for (const char* bad : {
           "not json",
           R"({"scheme":"stable","d":2,"L":8,"colour":"red"})",
           R"({"scheme":"sorted","d":2,"L":8})",
           R"({"scheme":"stable","d":0,"L":8})",
           R"({"scheme":"stable","d":2,"L":-1})",
           R"({"scheme":"stable","d":2,"L":"2^x"})",
           R"({"scheme":"stable","d":2,"L":8,"trials":0})",
           R"({"scheme":"stable","d":2,"L":8,"mode":"three-color"})",
           R"({"scheme":"stable","d":2,"L":8,"fit":{"r_min":5,"r_max":1}})",
           R"({"d":2,"L":8})",
           R"({"experiments":[]})",
           R"({"scheme":"solve-s","d":[0,2]})",
           R"([1,2])",
       }) {
    INFO(std::string(bad));
    CHECK_THROWS_AS(parse_run_config(bad), ConfigError);
  }
}

TEST_CASE("malformed and unsupported configs leave no output") {
  TempDir tmp("errors");
  CHECK(run_text(tmp, "{\"scheme\": ", "malformed") == 2);
  CHECK_FALSE(fs::exists(tmp.path / "malformed"));
  CHECK(run_config_file(tmp.path / "missing.json", tmp.path / "missing") == 2);

  for (const char* unsupported : {
           R"({"scheme":"hier","d":2,"L":1000})",
           R"({"scheme":"adjacent","d":2,"L":16})",
           R"({"scheme":"cone","d":2,"L":16,"boundary":"torus"})",
           R"({"scheme":"minlen","mode":"one-color","d":2,"L":100})",
           R"({"scheme":"stable","d":3,"L":1000})",
       }) {
    INFO(std::string(unsupported));
    const auto plan = parse_run_config(unsupported);
    CHECK_THROWS_AS(check_capability(plan.cells.at(0)), CapabilityError);
  }
  // A later unsupported cell stops the whole run before anything is written.
  CHECK(run_text(tmp,
                 R"({"experiments":[{"scheme":"stable","d":1,"L":64},{"scheme":"hier","d":1,"L":100}]})",
                 "capability") == 3);
  CHECK_FALSE(fs::exists(tmp.path / "capability"));
}

TEST_CASE("seeds are counter based") {
  auto cfg = parse_run_config(R"({"scheme":"stable","d":1,"L":256,"trials":3,"seed":5})").cells[0];
  auto more = cfg;
  more.trials = 6;
  for (int t = 0; t < 3; ++t) CHECK(trial_seed(cfg, t) == trial_seed(more, t));
  CHECK(trial_seed(cfg, 0) != trial_seed(cfg, 1));
  CHECK(sample_trial_points(cfg, 2).coords() == sample_trial_points(more, 2).coords());
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("every scheme runs and passes its invariants") {
  for (const char* text : {
           R"({"scheme":"stable","mode":"one-color","d":2,"L":20,"trials":3})",
           R"({"scheme":"stable","d":1,"L":200,"trials":3,"samples":"per-pair"})",
           R"({"scheme":"stable","d":2,"L":20,"trials":2,"boundary":"box","interior_margin":2})",
           R"({"scheme":"hier","d":2,"L":16,"trials":3})",
           R"({"scheme":"adjacent","d":1,"L":500,"trials":3})",
           R"({"scheme":"msf","d":2,"L":20,"trials":3})",
           R"({"scheme":"cone","d":3,"L":8,"trials":3})",
           R"({"scheme":"minlen","d":2,"L":6,"trials":3})",
       }) {
    INFO(std::string(text));
    const auto cfg = parse_run_config(text).cells[0];
    const auto r = run_cell(cfg, 2);
    CHECK(r.failures.empty());
    CHECK(r.tail.trials == static_cast<std::size_t>(cfg.trials));
    CHECK(r.seeds.size() == static_cast<std::size_t>(cfg.trials));
    CHECK_FALSE(r.tail.samples.empty());
    for (const auto& inv : r.invariant_totals) CHECK(inv.passed);
  }
}

TEST_CASE("cell results do not depend on the worker count") {
  const auto cfg = parse_run_config(R"({"scheme":"stable","d":2,"L":16,"trials":7,"seed":3})").cells[0];
  const auto a = run_cell(cfg, 1);
  const auto b = run_cell(cfg, 4);
  CHECK(a.tail.samples == b.tail.samples);
  CHECK(a.seeds == b.seeds);
  CHECK(a.tail.censored == b.tail.censored);
}

TEST_CASE("artifact directories are byte identical across runs") {
  TempDir tmp("determinism");
  const std::string config = R"({"experiments":[
      {"scheme":"stable","d":1,"L":"2^10","trials":4,"seed":1},
      {"scheme":"msf","d":2,"L":12,"trials":2,"seed":2},
      {"scheme":"solve-s","d":[2,3,10,100]}]})";
  REQUIRE(run_text(tmp, config, "a", 1) == 0);
  REQUIRE(run_text(tmp, config, "b", 3) == 0);
  auto a = tree(tmp.path / "a"), b = tree(tmp.path / "b");
  CHECK(a.count("metadata.json"));
  a.erase("metadata.json");
  b.erase("metadata.json");
  CHECK(a == b);
  CHECK(a.count("summary.json"));
  CHECK(a.count("00_stable_two-color_d1/tail.csv"));
  CHECK(a.count("00_stable_two-color_d1/tail.svg"));
  CHECK(a.count("01_msf_one-color_d2/sample_forest.csv"));

  const auto tail = nlohmann::json::parse(a.at("00_stable_two-color_d1/tail.json"));
  const auto cfg = parse_run_config(R"({"scheme":"stable","d":1,"L":"2^10","trials":4,"seed":1})").cells[0];
  CHECK(tail.at("config_hash") == fnv1a_hex(cfg.canonical));
  CHECK(tail.at("seeds").size() == 4);

  std::istringstream csv(a.at("02_solve-s/exponents.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "d,s,s_log_d,residual,evaluations");
  const double want[] = {0.496, 0.449, 0.339, 0.224};
  int rows = 0;
  while (std::getline(csv, line)) {
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
    CHECK(std::abs(std::stod(line.substr(c1 + 1, c2 - c1 - 1)) - want[rows]) <= 1e-3);
    ++rows;
  }
  CHECK(rows == 4);
}

TEST_CASE("figure panels") {
  TempDir tmp("figure");
  const auto small = figure1(3, 4, tmp.path / "small");
  CHECK(small.min_one_color_exact);
  CHECK(small.files.size() == 4);
  CHECK(small.min_one_color_length <= small.stable_one_color_length + 1e-12);

  const auto a = figure1(7, 400, tmp.path / "a");
  const auto b = figure1(7, 400, tmp.path / "b");
  CHECK_FALSE(a.min_one_color_exact);
  REQUIRE(a.files.size() == 4);
  for (std::size_t k = 0; k < a.files.size(); ++k) {
    CHECK(a.files[k].filename() == b.files[k].filename());
    CHECK(slurp(a.files[k]) == slurp(b.files[k]));
  }
  CHECK(slurp(a.files[1]).find("greedy") != std::string::npos);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = figure1(seed, 200, tmp.path / ("s" + std::to_string(seed)));
    CHECK(f.min_two_color_length <= f.stable_two_color_length + 1e-9);
    CHECK(f.min_one_color_length <= f.stable_one_color_length + 1e-9);
  }
}

TEST_CASE("oracle suite is green and catches a strictness mutation") {
  const auto checks = oracle_suite({Strictness::Strict, 20});
  for (const auto& c : checks) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.passed);
  }
  const auto mutated = oracle_suite({Strictness::NonStrict, 20});
  bool caught = false;
  for (const auto& c : mutated)
    if (c.name == "stable_match_vs_brute_force") caught = !c.passed;
  CHECK(caught);
}
