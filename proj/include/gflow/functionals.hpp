#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gflow/coefficients.hpp"
#include "gflow/grid.hpp"

namespace gflow {

/// Per-step monitored functionals.  Columns are fixed; one CSV row each.
/// Entries whose formula is unavailable for the run's beta (log branches)
/// hold 0.  weak_residual needs the whole trajectory and is filled on the
/// final record only.
struct DiagRecord {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;          // int kappa_eps(rho) |dx rho|^2 / 2
  double entropy = 0.0;         // int 4 rho^{(b+3)/2} / ((b+3)(b+1))
  double f_entropy = 0.0;       // int F_eps(rho)
  double entropy_dissip = 0.0;  // 4/(b+1)^2 int rho^{(b+3)/2} |dxx rho^{(b+1)/2}|^2
  double energy_dissip = 0.0;   // int rho u^2 + delta int |dx u|^2
  double rho_min = 0.0;
  double rho_max = 0.0;
  double theta_h2 = 0.0;    // int |dxx rho^theta|^2
  double theta_grad4 = 0.0; // int |dx rho^{theta/2}|^4
  double weak_residual = 0.0;

  static std::string csv_header();
  std::string csv_row() const;
};

double mass(const Field& rho);
double korteweg_energy(const Field& rho, const Params& p);
double entropy(const Field& rho, const Params& p);
double entropy_dissipation(const Field& rho, const Params& p);
double f_entropy(const Field& rho, const Params& p);
std::pair<double, double> theta_norms(const Field& rho, const Params& p);

/// int |dx rho^{(beta+2)/2}|^2, the monotone quantity of the energy
/// estimate (beta != -2).
double energy_halfpower(const Field& rho, const Params& p);

/// Instantaneous dissipation density of the regularized energy law:
/// int rho u^2 + delta int |dx u|^2.
double velocity_dissipation(const Field& rho, const Field& u, double delta);

/// eps * max |ln rho|; the measured positivity-envelope exponent.
double vacuum_exponent(const Field& rho, const Params& p);

DiagRecord diagnostics(double t, const Field& rho, const Params& p,
                       const Field* u = nullptr, double delta = 0.0);

/// Timestamped density snapshot of a trajectory.
struct Snapshot {
  double t;
  Field rho;
};

/// One space-time test function psi(t,x) = cos(2 pi k x / L + phase) *
/// eta(t / (support_frac * T)), with eta(s) = (1 - s^2)^5 on [0,1).
struct WeakTestFunction {
  int k;
  double phase;
  double support_frac;
};

struct WeakBank {
  std::vector<WeakTestFunction> members;
  /// 15 members: k in 0..4 crossed with support fractions {1/3, 2/3, 1},
  /// phases 0.3 k.
  static WeakBank standard();
};

/// Residual of the weak formulation over a stored trajectory: max over the
/// bank of | -II rho dpsi/dt + (1/theta) II rho^{b+2-theta} dxx(rho^theta)
/// dxx(psi) - (b+3)/theta^2 II rho^{b+2-theta} |dx rho^{theta/2}|^2
/// dxx(psi) - I rho^0 psi(0) |.  Space integrals use grid quadrature; time
/// integrals pair the piecewise-linear-in-t spatial moments with the
/// polynomial bump exactly (6-point Gauss per interval).
/// Requires at least 3 snapshots.
double weak_residual(const std::vector<Snapshot>& traj, const Params& p,
                     const WeakBank& bank);

}  // namespace gflow
