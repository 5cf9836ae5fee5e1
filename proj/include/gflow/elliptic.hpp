#pragma once

#include "gflow/coefficients.hpp"
#include "gflow/grid.hpp"

namespace gflow {

/// Periodic velocity equation -delta dxx(u) + rho u = rhs.  The operator
/// is symmetric positive definite for rho > 0, delta >= 0.
struct EllipticProblem {
  Field rho;
  double delta;
  Field rhs;
  double positivity_floor = 1e-10;  // required on min(rho) when delta == 0
  // set when rhs was assembled as an exact flux divergence; its zero
  // discrete mean is then asserted as an assembly sanity check
  bool expect_zero_mean = false;
};

/// Flux divergence dx(rho mu_eps'(rho) dxx(phi_eps(rho))); zero discrete
/// mean by construction.
Field assemble_rhs(const Field& rho, const Params& p);

struct VelocitySolution {
  Field u;
  double residual;  // max-norm of -delta dxx(u) + rho u - rhs
  int iterations;   // 0 for the direct paths
};

/// Solve the velocity equation.  delta = 0 reduces to the pointwise
/// diagonal solve u = rhs / rho.  SPECTRAL uses preconditioned CG with the
/// constant-coefficient symbol (delta k^2 + mean rho); FD4 assembles the
/// periodic banded system and solves it directly.  Hard error on
/// breakdown or non-convergence.
VelocitySolution solve_velocity(const EllipticProblem& prob);

}  // namespace gflow
