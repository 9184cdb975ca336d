#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pointmatch/constructions.hpp"
#include "pointmatch/geometry.hpp"
#include "pointmatch/matching.hpp"

namespace pm {

enum class Scheme { Stable, Hierarchical, Adjacent, Msf, Cone, MinLength };

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& s);

// ---------------------------------------------------------------------------
// Distance samples

enum class SampleMode {
  /// One sample per matched point (each pair contributes twice).
  PerEndpoint,
  /// One sample per pair; in two-color mode this is one per matched red point.
  PerPair,
};

struct DistanceSamples {
  std::vector<double> values;
  /// Unmatched points that would have contributed a sample.
  std::size_t censored = 0;
  /// Points dropped for lying within the interior margin of a box boundary.
  std::size_t excluded = 0;
};

/// Window-average estimator of the typical matching distance. In a box,
/// points closer than interior_margin to the boundary are skipped.
DistanceSamples match_distances(const ColoredPointSet& points, const Matching& m,
                                SampleMode mode = SampleMode::PerEndpoint,
                                double interior_margin = 0.0);

// ---------------------------------------------------------------------------
// Survival curves and tail fits

struct SurvivalPoint {
  double r;
  double survival;
};

/// Exact fraction of observations strictly greater than each grid value.
/// Censored observations count as greater than every r. Throws on no data.
std::vector<SurvivalPoint> empirical_survival(std::span<const double> samples,
                                              std::span<const double> grid,
                                              std::size_t censored = 0);

/// `count` logarithmically spaced values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t count);

struct PowerLawFit {
  /// Minus the least-squares slope of log S against log r.
  double exponent = 0;
  double intercept = 0;
  /// Includes the sampling covariance of the survival curve when the
  /// observation count is known; residual_std_error is the plain OLS value.
  double std_error = 0;
  double residual_std_error = 0;
  double r_min = 0;
  double r_max = 0;
  std::size_t points = 0;
  /// Quadratic coefficient of log S in log r, and its standard error. A power
  /// law has none; an exponential tail bends downward.
  double curvature = 0;
  double curvature_stderr = 0;

  bool nonlinear() const;
};

/// Log-log regression over grid points with r_min <= r <= r_max. Needs at
/// least 5 such points; throws std::invalid_argument if fewer or if any
/// survival value in the window is zero. `observations` is the sample size
/// behind the curve (0 if unknown); the curve must be sorted by r.
PowerLawFit fit_power_law(std::span<const SurvivalPoint> curve, double r_min, double r_max,
                          std::size_t observations = 0);

/// Mean nearest-neighbour distance of a Poisson process of the given intensity.
double poisson_mean_nn_distance(int dim, double intensity);

struct FitWindow {
  double r_min;
  double r_max;
};

/// r_min = 2 * mean NN distance; r_max = smallest r with fewer than 100
/// observations above it, capped at L/4.
FitWindow default_fit_window(std::span<const double> samples, std::size_t censored,
                             double mean_nn_distance, double side);

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

struct KsResult {
  double statistic = 0;
  double p_value = 1;
  std::size_t n = 0;
};

/// P(K > x) for the Kolmogorov limit distribution.
double kolmogorov_survival(double x);

/// One-sample test of samples against Exp(rate).
KsResult ks_exponential(std::span<const double> samples, double rate = 1.0);

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Trial accumulation

/// Mergeable summary of trial outputs. Merging concatenates samples and sums
/// counts, so any merge order gives the same sorted summary.
struct TailAccumulator {
  std::vector<double> samples;
  std::size_t censored = 0;
  std::size_t points = 0;
  std::size_t trials = 0;

  void add(const DistanceSamples& s, std::size_t n_points);
  void merge(const TailAccumulator& other);
};

struct TailEstimate {
  std::vector<double> samples;  // sorted
  std::size_t censored = 0;
  std::vector<SurvivalPoint> survival;
  std::optional<PowerLawFit> fit;
  std::size_t points = 0;
  std::size_t trials = 0;
  std::string scheme;
  std::string domain;
};

/// Sorts the accumulated samples, evaluates the survival on a log grid over
/// the sample support, and fits a power law in `window` when possible.
TailEstimate make_tail_estimate(TailAccumulator acc, std::optional<FitWindow> window,
                                std::size_t grid_points = 48);

void write_tail_csv(std::ostream& out, const TailEstimate& tail);
void write_tail_svg(std::ostream& out, const TailEstimate& tail, const std::string& title);

// ---------------------------------------------------------------------------
// Invariant reports

struct InvariantResult {
  std::string name;
  bool passed = true;
  /// Hard invariants are exact combinatorial facts; a failure is a bug.
  bool hard = true;
  std::string detail;
};

struct InvariantReport {
  std::vector<InvariantResult> results;

  bool all_hard_passed() const;
  const InvariantResult* find(const std::string& name) const;
};

struct InvariantOptions {
  Scheme scheme = Scheme::Stable;
  /// Needed for the forest-distance check of the forest schemes.
  const Forest* forest = nullptr;
  /// Values of t for the t-bad separation check; empty picks 20 log-spaced values.
  std::vector<double> t_grid;
  /// Above this size the O(n^2) stability scan is replaced by the indexed one.
  std::size_t quadratic_check_limit = 3000;
};

InvariantReport invariant_report(const ColoredPointSet& points, const Matching& m,
                                 const InvariantOptions& options);

}  // namespace pm
