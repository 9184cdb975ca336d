#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pm {

/// Surface measure of the unit sphere in R^d, 2 pi^(d/2) / Gamma(d/2).
/// sphere_area(1) = 2. Throws std::invalid_argument for d < 1.
double sphere_area(int d);
double log_sphere_area(int d);
/// omega_d / omega_{d-1}, computed from log-Gamma differences (d >= 2).
double sphere_area_ratio(int d);

/// g(t) = 2 omega_d 1[1,2](t) (t-1)^(d-1)
///        - omega_{d-1}/(d-1) 1[0,2](t) (1-(t/2)^2)^((d-1)/2),   d >= 2, t >= 0.
double kernel_g(double t, int d);

/// The unique zero of g in (0, 2), by bisection.
double kernel_root(int d);

/// Integral of g over [0, inf); equals omega_d / d.
double kernel_integral(int d, double tol = 1e-12);

/// Phi(s) = integral of g(t) t^(-s) over [0, inf), for 0 <= s < 1.
double phi(double s, int d, double tol = 1e-12);

/// Phi(s) / omega_{d-1}. Same sign and root as Phi, but free of the tiny
/// prefactors of large d.
double phi_normalized(double s, int d, double tol = 1e-12);

struct ExponentSolution {
  int d = 0;
  double s = 0;
  /// |Phi(s)| / omega_{d-1} at the returned s (0 for d = 1).
  double residual = 0;
  std::size_t evaluations = 0;
};

/// Root of Phi in (0, 1) by sign-change bracketing and bisection to `tol`.
/// d = 1 returns the known constant 1/2 without solving. Throws SolverError
/// when no sign change is found.
ExponentSolution solve_s(int d, double tol = 1e-6);

/// sqrt(pi) (2^s - 2s) Gamma((2-s)/2) - Gamma((3-s)/2); zero at s(2).
double d2_closed_form_residual(double s);

struct AsymptoticsRow {
  int d;
  double s;
  double s_log_d;
};

std::vector<AsymptoticsRow> s_asymptotics_table(std::span<const int> d_list, double tol = 1e-6);

}  // namespace pm
