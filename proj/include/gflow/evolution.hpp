#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "gflow/config.hpp"
#include "gflow/elliptic.hpp"
#include "gflow/functionals.hpp"

namespace gflow {

/// Solution snapshot in one of the three formulations.  rho is always
/// present; u for regularized/skew, q (= sqrt(kappa_eps/rho) dx rho) for
/// skew.
struct State {
  double t = 0.0;
  Formulation formulation = Formulation::Direct;
  Field rho;
  std::optional<Field> u;
  std::optional<Field> q;
};

struct StepController {
  double dt = 0.0;
  double dt_min = 1e-15;
  double dt_max = 1e-2;
  double safety = 0.8;
  double cfl4 = 0.25;   // fourth-order stability coefficient
  bool adaptive = true; // false pins dt (refinement ladders, comparisons)
};

/// Evolution parameters: coefficient family plus the velocity damping
/// actually in effect (delta_eps by default, overridable).
struct Dynamics {
  Params params;
  double delta = 0.0;
  double q_drift_tol = 1e-6;
  int reproject_every = 50;
};

/// Step rejection cascade bottomed out at dt_min.
struct VacuumTermination : std::runtime_error {
  explicit VacuumTermination(const std::string& what)
      : std::runtime_error(what) {}
};

/// Conservative flux of the direct formulation:
/// J = rho dx( dx(kappa_eps dx rho) - kappa_eps'/2 |dx rho|^2 );
/// the update is d rho/dt = -dx(J).
Field flux_direct(const Field& rho, const Params& p);

/// Largest stable explicit step for the current density:
/// safety * cfl4 * h^4 / (max rho kappa_eps(rho) * c4), c4 the backend's
/// fourth-derivative symbol constant.
double stable_dt(const Field& rho, const Params& p,
                 const StepController& ctrl);

/// Classical 4-stage explicit step of the semidiscrete system for the
/// state's formulation.  Rejects and halves ctrl.dt when positivity (or
/// finiteness) is lost mid-stage; throws VacuumTermination below dt_min.
State step_explicit(const State& s, const Dynamics& dyn,
                    StepController& ctrl);

/// Linearly implicit step: the rho^n-frozen leading coefficient
/// a = rho kappa_eps(rho) multiplies the fourth-order derivative of the
/// increment in divergence form dx(a dx3 .); remainder explicit.  First
/// order in time, unconditionally stable in the linearized sense.
/// Direct/regularized formulations only.
State step_semi_implicit(const State& s, const Dynamics& dyn,
                         StepController& ctrl);

/// Formulation-checked wrappers.
State step_regularized(const State& s, const Dynamics& dyn,
                       StepController& ctrl);
State step_skew(const State& s, const Dynamics& dyn, StepController& ctrl);

/// Discrete skew-adjointness defect of the (Q,u) pairing, normalized:
/// |int dx(kt dx u) q - int dx(kt dx q) u| / (1 + |.| + |.|).
double skew_pairing_residual(const State& s, const Params& p);

/// q drift from its definition, max-norm.
double skew_q_drift(const State& s, const Params& p);

enum class Termination { TEnd, Vacuum, DtUnderflow, UserAbort };

std::string to_string(Termination t);

/// Uniform-in-eps diagnostic suprema accumulated along a run (the
/// eps-weighted time integrals of the second-derivative bounds).
struct SweepStats {
  double sup_energy_halfpower = 0.0;
  double sup_rho_max = 0.0;
  double int_theta_h2 = 0.0;
  double int_theta_grad4 = 0.0;
  double eps_int_h2_mid = 0.0;    // eps II |dxx rho^{(2b+3)/4}|^2
  double eps_int_g4_mid = 0.0;    // eps II |dx rho^{(2b+3)/8}|^4
  double eps3_int_h2_neg = 0.0;   // eps^3 II |dxx rho^{-1/4}|^2
  double eps3_int_g4_neg = 0.0;   // eps^3 II |dx rho^{-1/8}|^4
  double khat_max = 0.0;          // sup_t eps max|ln rho|
};

struct RunResult {
  Termination termination = Termination::TEnd;
  std::vector<Snapshot> snapshots;
  std::vector<DiagRecord> diagnostics;
  std::optional<State> final_state;
  long steps_accepted = 0;
  long steps_rejected = 0;
  int reprojections = 0;
  double skew_pairing_max = 0.0;
  double delta_used = 0.0;
  bool delta_underflow = false;
  bool datum_lifted = false;
  double weak_residual_final = 0.0;
  SweepStats sweep;
};

/// Drive a full run from a validated config; snapshots at the configured
/// cadence (always including t = 0 and the final state), one DiagRecord
/// per accepted step.
RunResult run(const RunConfig& cfg);

}  // namespace gflow
