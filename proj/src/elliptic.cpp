#include "gflow/elliptic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gflow/banded.hpp"

namespace gflow {

namespace {

Field apply_operator(const Field& u, const Field& rho, double delta) {
  if (delta == 0.0) return rho * u;
  return -delta * dxx(u) + rho * u;
}

double dot(const Field& a, const Field& b) {
  double s = 0.0, c = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    double y = a[i] * b[i] - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

VelocitySolution solve_spectral(const EllipticProblem& prob) {
  const Field& rho = prob.rho;
  const Field& rhs = prob.rhs;
  const double delta = prob.delta;
  const double rho_bar = integrate(rho) / rho.grid().length();
  const double tol = 1e-12 * (1.0 + rhs.max_abs());

  Field u = Field::constant(rhs.grid_ptr(), 0.0);
  Field r = rhs;
  Field z = symbol_solve(r, rho_bar, delta, 0.0);
  Field pdir = z;
  double rz = dot(r, z);
  int it = 0;
  const int max_it = 1000;
  while (it < max_it) {
    if ((r).max_abs() <= tol) break;
    Field ap = apply_operator(pdir, rho, delta);
    double papp = dot(pdir, ap);
    if (!(papp > 0.0)) {
      throw std::runtime_error(
          "solve_velocity: CG breakdown, operator not positive definite "
          "(min rho = " +
          std::to_string(rho.min()) + ")");
    }
    double alpha = rz / papp;
    u = u + alpha * pdir;
    r = r - alpha * ap;
    z = symbol_solve(r, rho_bar, delta, 0.0);
    double rz_new = dot(r, z);
    pdir = z + (rz_new / rz) * pdir;
    rz = rz_new;
    ++it;
  }
  double res = max_abs_diff(apply_operator(u, rho, delta), rhs);
  if (res > 1e-10 * (1.0 + rhs.max_abs())) {
    throw std::runtime_error(
        "solve_velocity: CG failed to reach tolerance, residual " +
        std::to_string(res));
  }
  return {u, res, it};
}

VelocitySolution solve_fd4(const EllipticProblem& prob) {
  const Grid& g = prob.rho.grid();
  const int n = g.n();
  const double delta = prob.delta;
  const double c = delta / (12.0 * g.h() * g.h());
  // -delta * D2 + diag(rho), D2 stencil (-1,16,-30,16,-1)/(12 h^2)
  std::vector<std::vector<double>> rows(n, std::vector<double>(5, 0.0));
  for (int i = 0; i < n; ++i) {
    rows[i][0] = c;
    rows[i][1] = -16.0 * c;
    rows[i][2] = 30.0 * c + prob.rho[i];
    rows[i][3] = -16.0 * c;
    rows[i][4] = c;
  }
  CyclicBanded a(n, 2, std::move(rows));
  std::vector<double> sol =
      a.solve(std::vector<double>(prob.rhs.values().begin(),
                                  prob.rhs.values().end()));
  Field u(prob.rho.grid_ptr(), std::move(sol));
  double res = max_abs_diff(apply_operator(u, prob.rho, delta), prob.rhs);
  if (res > 1e-10 * (1.0 + prob.rhs.max_abs())) {
    throw std::runtime_error(
        "solve_velocity: banded solve residual too large: " +
        std::to_string(res));
  }
  return {u, res, 0};
}

}  // namespace

Field assemble_rhs(const Field& rho, const Params& p) {
  Field mu_p = rho.map([&](double r) { return mu_eps_prime(r, p); });
  Field phi = rho.map([&](double r) { return phi_eps(r, p); });
  return dx(rho * mu_p * dxx(phi));
}

VelocitySolution solve_velocity(const EllipticProblem& prob) {
  const Field& rho = prob.rho;
  if (rho.size() != prob.rhs.size()) {
    throw std::invalid_argument("solve_velocity: rho/rhs size mismatch");
  }
  double rho_min = rho.min();
  if (!(rho_min > 0.0)) {
    throw VacuumError("solve_velocity: rho not strictly positive", -1,
                      rho_min);
  }
  if (prob.delta < 0.0) {
    throw std::invalid_argument("solve_velocity: delta must be >= 0");
  }
  if (prob.expect_zero_mean) {
    // assembly sanity: an exact divergence has zero discrete mean
    double mean_rhs = integrate(prob.rhs) / rho.grid().length();
    if (std::abs(mean_rhs) > 1e-10 * (1.0 + prob.rhs.max_abs())) {
      throw std::invalid_argument(
          "solve_velocity: rhs mean " + std::to_string(mean_rhs) +
          " is not zero; not an exact flux divergence");
    }
  }

  if (prob.delta == 0.0) {
    if (rho_min < prob.positivity_floor) {
      throw VacuumError(
          "solve_velocity: delta = 0 requires min rho >= floor", -1,
          rho_min);
    }
    std::vector<double> vals(rho.size());
    for (int i = 0; i < rho.size(); ++i) vals[i] = prob.rhs[i] / rho[i];
    Field u(rho.grid_ptr(), std::move(vals));
    double res = max_abs_diff(rho * u, prob.rhs);
    return {u, res, 0};
  }
  if (rho.grid().backend() == Backend::Spectral) return solve_spectral(prob);
  return solve_fd4(prob);
}

}  // namespace gflow
