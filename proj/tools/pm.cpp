// pm: experiment runner for matchings of Poisson point processes.
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pointmatch/errors.hpp"
#include "pointmatch/experiment.hpp"
#include "pointmatch/exponent.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Stable and other matchings of Poisson point processes"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "pm-out";
  auto* run = app.add_subcommand("run", "Run a JSON-configured experiment campaign");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Artifact directory");

  int d = 2;
  double tol = 1e-6;
  auto* solve = app.add_subcommand("solve-s", "Solve for the tail exponent s(d)");
  solve->add_option("--d", d, "Dimension (>= 1)")->required();
  solve->add_option("--tol", tol, "Root tolerance");

  std::vector<int> dims{2, 3, 10, 100};
  auto* table = app.add_subcommand("s-table", "CSV table of d, s(d), s(d) log d");
  table->add_option("--d", dims, "Dimensions");
  table->add_option("--tol", tol, "Root tolerance");

  std::uint64_t seed = 1;
  std::size_t n = 2000;
  std::string fig_dir = "figure1";
  auto* fig = app.add_subcommand("figure1", "Four comparison panels as SVG");
  fig->add_option("--seed", seed, "Seed")->required();
  fig->add_option("--n", n, "Number of points");
  fig->add_option("--out", fig_dir, "Output directory");

  int seeds = 100;
  auto* oracle = app.add_subcommand("oracle-suite", "Cross-check fast algorithms against brute force");
  oracle->add_option("--seeds", seeds, "Instances per check");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return pm::run_config_file(config_path, out_dir);
    if (*solve) {
      const auto r = pm::solve_s(d, tol);
      nlohmann::json j{{"d", r.d}, {"s", r.s}, {"residual", r.residual}, {"evaluations", r.evaluations}};
      std::cout << j.dump() << "\n";
      return 0;
    }
    if (*table) {
      std::printf("d,s,s_log_d\n");
      for (const auto& row : pm::s_asymptotics_table(dims, tol)) std::printf("%d,%.6f,%.6f\n", row.d, row.s, row.s_log_d);
      return 0;
    }
    if (*fig) {
      const auto r = pm::figure1(seed, n, fig_dir);
      for (const auto& f : r.files) std::cout << f.string() << "\n";
      std::printf("lengths: stable1=%.6f min1=%.6f%s stable2=%.6f min2=%.6f\n", r.stable_one_color_length,
                  r.min_one_color_length, r.min_one_color_exact ? "" : " (approximate)", r.stable_two_color_length,
                  r.min_two_color_length);
      return 0;
    }
    if (*oracle) {
      pm::OracleOptions opt;
      opt.seeds = seeds;
      bool ok = true;
      for (const auto& c : pm::oracle_suite(opt)) {
        std::printf("%-4s %-34s %s\n", c.passed ? "ok" : "FAIL", c.name.c_str(), c.detail.c_str());
        ok = ok && c.passed;
      }
      return ok ? 0 : 1;
    }
  } catch (const pm::CapabilityError& e) {
    std::cerr << "capability error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
