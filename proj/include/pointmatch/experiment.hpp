#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pointmatch/analysis.hpp"
#include "pointmatch/constructions.hpp"
#include "pointmatch/geometry.hpp"
#include "pointmatch/matching.hpp"
#include "pointmatch/stable.hpp"

namespace pm {

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// One simulation cell: a scheme applied to `trials` independent samples.
struct ExperimentConfig {
  Scheme scheme = Scheme::Stable;
  MatchMode mode = MatchMode::TwoColor;
  int dim = 1;
  double side = 1024;
  double intensity = 1.0;
  int trials = 1;
  Boundary boundary = Boundary::Torus;
  std::uint64_t seed = 0;
  double interior_margin = 0.0;
  SampleMode sample_mode = SampleMode::PerEndpoint;
  /// Explicit fit window; empty means the default window.
  std::optional<FitWindow> fit;
  /// Canonical JSON text of this cell (the source of the config hash).
  std::string canonical;
};

/// A `solve-s` cell: the exponent table for the listed dimensions.
struct ExponentConfig {
  std::vector<int> dims;
  double tol = 1e-6;
  std::string canonical;
};

struct RunPlan {
  std::vector<ExperimentConfig> cells;
  std::vector<ExponentConfig> exponent_cells;
};

/// Parses a single cell object or {"experiments": [cells...]}. Throws
/// ConfigError on any schema violation, before anything is run.
RunPlan parse_run_config(const std::string& json_text);

/// Throws CapabilityError when the scheme cannot run on the configured domain.
void check_capability(const ExperimentConfig& cfg);

/// FNV-1a 64-bit hash, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

std::uint64_t trial_seed(const ExperimentConfig& cfg, int trial);

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  std::size_t n_points = 0;
  ColoredPointSet points{Domain(1, 1.0)};
  Matching matching;
  std::optional<Forest> forest;
  InvariantReport report;
  DistanceSamples samples;
};

/// Samples the point process of one trial.
ColoredPointSet sample_trial_points(const ExperimentConfig& cfg, int trial);

/// Builds the configured matching on given points (forest filled for forest schemes).
Matching build_matching(const ExperimentConfig& cfg, const ColoredPointSet& points,
                        std::uint64_t seed, std::optional<Forest>* forest = nullptr);

TrialResult run_trial(const ExperimentConfig& cfg, int trial);

struct CellResult {
  ExperimentConfig config;
  TailEstimate tail;
  FitWindow window{};
  std::vector<std::uint64_t> seeds;
  /// First trial, kept for the sample artifacts.
  std::optional<TrialResult> first;
  /// Trials whose hard invariants failed, with their reports.
  std::vector<TrialResult> failures;
  std::vector<InvariantResult> invariant_totals;
};

/// Worker count: hardware concurrency, capped by PM_WORKERS when set.
unsigned default_workers();

/// Runs every trial of a cell (in parallel when workers > 1) and merges the
/// results in trial order.
CellResult run_cell(const ExperimentConfig& cfg, unsigned workers = default_workers());

/// Writes one directory per cell plus summary.json and metadata.json.
/// Returns 0 if all hard invariants passed, 1 otherwise.
int run_plan(const RunPlan& plan, const std::filesystem::path& out_dir,
             unsigned workers = default_workers());

/// Parses `config_path` and runs it. Maps ConfigError to exit 2 and
/// CapabilityError to exit 3, writing nothing in those cases.
int run_config_file(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                    unsigned workers = default_workers());

// ---------------------------------------------------------------------------
// Figure panels

struct Figure1Result {
  double stable_one_color_length = 0;
  double min_one_color_length = 0;
  bool min_one_color_exact = false;
  double stable_two_color_length = 0;
  double min_two_color_length = 0;
  std::vector<std::filesystem::path> files;
};

/// Four SVG panels on a d = 2 torus of side sqrt(n): stable and minimum-length
/// one-color matchings of n points, stable and minimum-length two-color
/// matchings of n/2 red and n/2 blue points.
Figure1Result figure1(std::uint64_t seed, std::size_t n, const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// Oracle suite

struct OracleCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct OracleOptions {
  /// Strictness used when the brute-force enumerator judges stability.
  Strictness rule = Strictness::Strict;
  int seeds = 100;
};

std::vector<OracleCheck> oracle_suite(const OracleOptions& options = {});

}  // namespace pm
