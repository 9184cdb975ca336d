#include "pointmatch/exponent.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "pointmatch/errors.hpp"
#include "pointmatch/quadrature.hpp"

namespace pm {

namespace {

void require_kernel_dim(int d, const char* who) {
  if (d < 2) throw std::invalid_argument(std::string(who) + ": needs d >= 2 (got " + std::to_string(d) + ")");
}

// Integrates over [0, 1] split at scale, 2 scale, 4 scale, ... so that a peak
// of width ~scale at 0 cannot hide between the nodes of the first panel.
template <class F>
QuadratureResult integrate_graded(F&& f, double scale, double tol) {
  QuadratureResult total;
  total.converged = true;
  double a = 0;
  for (double b = std::min(scale, 1.0);; b = std::min(2 * b, 1.0)) {
    const auto r = integrate(f, a, b, tol);
    total.value += r.value;
    total.error += r.error;
    total.evaluations += r.evaluations;
    total.converged = total.converged && r.converged;
    if (b >= 1) break;
    a = b;
  }
  return total;
}

struct PhiParts {
  double value;
  std::size_t evaluations;
};

// Phi(s) / omega_{d-1} = 2 (omega_d/omega_{d-1}) I1 - I2 / (d-1).
PhiParts phi_parts(double s, int d, double tol) {
  if (!(s >= 0 && s < 1)) throw std::invalid_argument("phi: s must lie in [0, 1)");
  const double dm1 = d - 1;
  const double half = 0.5 * dm1;
  const double rho = sphere_area_ratio(d);

  // I1 over [1,2] with t = 2 - w.
  auto i1 = integrate_graded(
      [&](double w) { return std::exp(dm1 * std::log1p(-w) - s * std::log(2 - w)); }, 1 / dm1, tol);

  // I2 on [0,1] with t = u^(1/(1-s)), which absorbs the t^(-s) singularity.
  const double p = 1 / (1 - s);
  auto i2a = integrate_graded(
      [&](double u) {
        const double t = std::pow(u, p);
        return std::exp(half * std::log1p(-0.25 * t * t));
      },
      std::pow(1 / std::sqrt(dm1), 1 - s), tol);
  // I2 on [1,2] with t = 2 - v^2, which straightens the endpoint at t = 2.
  auto i2b = integrate(
      [&](double v) {
        if (v <= 0) return 0.0;
        const double v2 = v * v;
        const double base = 0.25 * v2 * (4 - v2);
        return 2 * v * std::exp(half * std::log(base) - s * std::log(2 - v2));
      },
      0.0, 1.0, tol);
  if (!i1.converged || !i2a.converged || !i2b.converged)
    throw SolverError("phi: quadrature did not converge for d=" + std::to_string(d) +
                      " s=" + std::to_string(s));
  const double i2 = p * i2a.value + i2b.value;
  return {2 * rho * i1.value - i2 / dm1, i1.evaluations + i2a.evaluations + i2b.evaluations};
}

}  // namespace

double log_sphere_area(int d) {
  if (d < 1) throw std::invalid_argument("sphere_area: needs d >= 1 (got " + std::to_string(d) + ")");
  const double h = 0.5 * d;
  return std::log(2.0) + h * std::log(std::numbers::pi) - std::lgamma(h);
}

double sphere_area(int d) { return std::exp(log_sphere_area(d)); }

double sphere_area_ratio(int d) {
  require_kernel_dim(d, "sphere_area_ratio");
  return std::sqrt(std::numbers::pi) * std::exp(std::lgamma(0.5 * (d - 1)) - std::lgamma(0.5 * d));
}

double kernel_g(double t, int d) {
  require_kernel_dim(d, "kernel_g");
  if (t < 0) throw std::invalid_argument("kernel_g: needs t >= 0");
  if (t > 2) return 0.0;
  const double dm1 = d - 1;
  double g = 0;
  if (t >= 1) g += std::exp(std::log(2.0) + log_sphere_area(d) + dm1 * std::log(t - 1));
  g -= std::exp(log_sphere_area(d - 1) - std::log(dm1) + 0.5 * dm1 * std::log1p(-0.25 * t * t));
  return g;
}

double kernel_root(int d) {
  require_kernel_dim(d, "kernel_root");
  double lo = 0, hi = 2;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (kernel_g(mid, d) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double phi_normalized(double s, int d, double tol) {
  require_kernel_dim(d, "phi");
  return phi_parts(s, d, tol).value;
}

double phi(double s, int d, double tol) {
  return sphere_area(d - 1) * phi_normalized(s, d, tol);
}

double kernel_integral(int d, double tol) { return phi(0.0, d, tol); }

ExponentSolution solve_s(int d, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("solve_s: tol must be positive");
  if (d == 1) return {1, 0.5, 0.0, 0};
  require_kernel_dim(d, "solve_s");
  const double quad_tol = std::min(1e-12, 1e-3 * tol);
  ExponentSolution out;
  out.d = d;
  auto eval = [&](double s) {
    const auto r = phi_parts(s, d, quad_tol);
    ++out.evaluations;
    return r.value;
  };
  constexpr double eps = 1e-6;
  double lo = eps, hi = 1 - eps;
  const double f_lo = eval(lo), f_hi = eval(hi);
  if (!(f_lo > 0 && f_hi < 0) && !(f_lo < 0 && f_hi > 0))
    throw SolverError("solve_s: no sign change of Phi on (" + std::to_string(lo) + ", " + std::to_string(hi) +
                      ") for d=" + std::to_string(d) + " (Phi=" + std::to_string(f_lo) + ", " +
                      std::to_string(f_hi) + ")");
  const bool decreasing = f_lo > 0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double f = eval(mid);
    if (f == 0) {
      lo = hi = mid;
      break;
    }
    ((f > 0) == decreasing ? lo : hi) = mid;
  }
  out.s = 0.5 * (lo + hi);
  out.residual = std::abs(eval(out.s));
  return out;
}

double d2_closed_form_residual(double s) {
  return std::sqrt(std::numbers::pi) * (std::exp2(s) - 2 * s) * std::tgamma(0.5 * (2 - s)) -
         std::tgamma(0.5 * (3 - s));
}

std::vector<AsymptoticsRow> s_asymptotics_table(std::span<const int> d_list, double tol) {
  std::vector<AsymptoticsRow> rows;
  rows.reserve(d_list.size());
  for (int d : d_list) {
    if (d < 2) throw std::invalid_argument("s_asymptotics_table: every d must be >= 2");
    const double s = solve_s(d, tol).s;
    rows.push_back({d, s, s * std::log(static_cast<double>(d))});
  }
  return rows;
}

}  // namespace pm
