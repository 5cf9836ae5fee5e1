#pragma once

#include <array>
#include <stdexcept>

namespace gflow {

/// Thrown when a density value leaves the admissible positive range.
struct VacuumError : std::domain_error {
  int index;     // grid index of the offending value, -1 for scalar calls
  double value;  // the offending value
  VacuumError(const std::string& what, int idx, double val)
      : std::domain_error(what), index(idx), value(val) {}
};

/// Parameters of the one-parameter coefficient family kappa(rho) = rho^beta
/// and its eps-regularization, together with every derived exponent used by
/// the energy/entropy machinery.
///
/// beta > -3 is required.  The four values {-2, -5/3, -3/2, -1} select
/// logarithmic branches of the antiderivatives; they are flagged here and
/// rejected by the operations that need phi/F or the entropy functionals.
/// The direct evolution only needs kappa and accepts them.
struct Params {
  double beta;
  double eps;        // regularization strength, in [0, 1)
  double delta_eps;  // eps^6 exp(-1/(2 eps^2)), 0 at eps = 0
  double alpha;      // (beta + 2) / 2
  double theta;      // (3 beta + 5) / 4
  std::array<bool, 4> excluded_flags;  // beta == -2, -5/3, -3/2, -1
  double rho_floor = 1e-300;  // values below this are a domain error

  explicit Params(double beta_, double eps_ = 0.0);

  bool log_branch() const {
    return excluded_flags[0] || excluded_flags[1] || excluded_flags[2] ||
           excluded_flags[3];
  }
};

/// delta_eps schedule: eps^6 exp(-1/(2 eps^2)) for eps > 0, exactly 0 at
/// eps = 0 (the continuous limit).  Requires eps >= 0.
double delta_schedule(double eps);

// Pointwise coefficient functions.  All require rho > 0 (>= p.rho_floor)
// and throw VacuumError otherwise.  With eps = 0 the eps-terms are omitted
// exactly, recovering the pure power family.

/// kappa_eps(rho) = rho^beta + 2 eps rho^{(beta-2)/2} + eps^2 rho^{-2}
double kappa_eps(double rho, const Params& p);
/// d/drho of kappa_eps
double kappa_eps_prime(double rho, const Params& p);

/// mu_eps(rho) = 2/(beta+3) rho^{(beta+3)/2} + 2 eps sqrt(rho)
double mu_eps(double rho, const Params& p);
/// mu_eps'(rho) = rho^{(beta+1)/2} + eps rho^{-1/2}
double mu_eps_prime(double rho, const Params& p);
/// mu_eps''(rho) = (beta+1)/2 rho^{(beta-1)/2} - (eps/2) rho^{-3/2}
double mu_eps_second(double rho, const Params& p);

/// phi_eps(rho) = 2/(beta+1) rho^{(beta+1)/2} - 2 eps rho^{-1/2}.
/// Rejects beta = -1 (log branch).
double phi_eps(double rho, const Params& p);
/// phi_eps'(rho) = rho^{(beta-1)/2} + eps rho^{-3/2}.  Defined for every
/// beta > -3; the formula has no log branch.
double phi_eps_prime(double rho, const Params& p);

/// F_eps(rho) = 4/((beta+1)(beta+3)) rho^{(beta+3)/2} - 4 eps sqrt(rho) + 3/2.
/// Antiderivative of phi_eps; rejects beta = -1.
double f_eps(double rho, const Params& p);

/// Constant C with rho |mu_eps''(rho)| <= C mu_eps'(rho) for all rho > 0:
/// |beta+1|/2 for eps = 0, max(|beta+1|/2, 1/2) for eps > 0.
double power_growth_constant(const Params& p);

}  // namespace gflow
