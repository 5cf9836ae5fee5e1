#include "gflow/coefficients.hpp"

#include <cmath>
#include <string>

namespace gflow {

namespace {

const std::array<double, 4> kExcluded = {-2.0, -5.0 / 3.0, -3.0 / 2.0, -1.0};
constexpr double kExcludedTol = 1e-12;

void check_rho(double rho, const Params& p) {
  if (!(rho > 0.0) || rho < p.rho_floor || !std::isfinite(rho)) {
    throw VacuumError("coefficient evaluated at nonpositive density rho=" +
                          std::to_string(rho),
                      -1, rho);
  }
}

}  // namespace

Params::Params(double beta_, double eps_) : beta(beta_), eps(eps_) {
  if (!(beta > -3.0)) {
    throw std::domain_error("Params: beta must exceed -3, got " +
                            std::to_string(beta));
  }
  if (!(eps >= 0.0) || eps >= 1.0) {
    throw std::domain_error("Params: eps must lie in [0, 1), got " +
                            std::to_string(eps));
  }
  delta_eps = delta_schedule(eps);
  alpha = 0.5 * (beta + 2.0);
  theta = 0.25 * (3.0 * beta + 5.0);
  for (std::size_t i = 0; i < kExcluded.size(); ++i) {
    excluded_flags[i] = std::abs(beta - kExcluded[i]) <= kExcludedTol;
  }
}

double delta_schedule(double eps) {
  if (eps < 0.0) {
    throw std::domain_error("delta_schedule: eps must be nonnegative");
  }
  if (eps == 0.0) return 0.0;
  return std::pow(eps, 6) * std::exp(-1.0 / (2.0 * eps * eps));
}

double kappa_eps(double rho, const Params& p) {
  check_rho(rho, p);
  double v = std::pow(rho, p.beta);
  if (p.eps > 0.0) {
    v += 2.0 * p.eps * std::pow(rho, 0.5 * (p.beta - 2.0)) +
         p.eps * p.eps / (rho * rho);
  }
  return v;
}

double kappa_eps_prime(double rho, const Params& p) {
  check_rho(rho, p);
  double v = p.beta * std::pow(rho, p.beta - 1.0);
  if (p.eps > 0.0) {
    v += p.eps * (p.beta - 2.0) * std::pow(rho, 0.5 * (p.beta - 4.0)) -
         2.0 * p.eps * p.eps * std::pow(rho, -3.0);
  }
  return v;
}

double mu_eps(double rho, const Params& p) {
  check_rho(rho, p);
  double v = 2.0 / (p.beta + 3.0) * std::pow(rho, 0.5 * (p.beta + 3.0));
  if (p.eps > 0.0) v += 2.0 * p.eps * std::sqrt(rho);
  return v;
}

double mu_eps_prime(double rho, const Params& p) {
  check_rho(rho, p);
  double v = std::pow(rho, 0.5 * (p.beta + 1.0));
  if (p.eps > 0.0) v += p.eps / std::sqrt(rho);
  return v;
}

double mu_eps_second(double rho, const Params& p) {
  check_rho(rho, p);
  double v = 0.5 * (p.beta + 1.0) * std::pow(rho, 0.5 * (p.beta - 1.0));
  if (p.eps > 0.0) v -= 0.5 * p.eps * std::pow(rho, -1.5);
  return v;
}

double phi_eps(double rho, const Params& p) {
  check_rho(rho, p);
  if (p.excluded_flags[3]) {
    throw std::domain_error("phi_eps: beta = -1 selects the log branch");
  }
  double v = 2.0 / (p.beta + 1.0) * std::pow(rho, 0.5 * (p.beta + 1.0));
  if (p.eps > 0.0) v -= 2.0 * p.eps / std::sqrt(rho);
  return v;
}

double phi_eps_prime(double rho, const Params& p) {
  check_rho(rho, p);
  double v = std::pow(rho, 0.5 * (p.beta - 1.0));
  if (p.eps > 0.0) v += p.eps * std::pow(rho, -1.5);
  return v;
}

double f_eps(double rho, const Params& p) {
  check_rho(rho, p);
  if (p.excluded_flags[3]) {
    throw std::domain_error("f_eps: beta = -1 selects the log branch");
  }
  double v = 4.0 / ((p.beta + 1.0) * (p.beta + 3.0)) *
             std::pow(rho, 0.5 * (p.beta + 3.0)) +
             1.5;
  if (p.eps > 0.0) v -= 4.0 * p.eps * std::sqrt(rho);
  return v;
}

double power_growth_constant(const Params& p) {
  double power_branch = 0.5 * std::abs(p.beta + 1.0);
  if (p.eps == 0.0) return power_branch;
  return std::max(power_branch, 0.5);
}

}  // namespace gflow
