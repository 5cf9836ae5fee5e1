#include "gflow/evolution.hpp"

#include <cmath>
#include <string>

#include "gflow/banded.hpp"

namespace gflow {

namespace {

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

Field kappa_field(const Field& rho, const Params& p) {
  return rho.map([&](double r) { return kappa_eps(r, p); });
}

Field q_reference(const Field& rho, const Params& p) {
  Field kap = kappa_field(rho, p);
  Field inv = power_field(rho, -1.0);
  return (kap * inv).map([](double v) { return std::sqrt(v); }) * dx(rho);
}

// Right-hand sides of the three semidiscrete systems.  u_out, when given,
// receives the velocity of the evaluated state.

Field rhs_direct(const Field& rho, const Dynamics& dyn) {
  return -dx(flux_direct(rho, dyn.params));
}

Field rhs_regularized(const Field& rho, const Dynamics& dyn, Field* u_out) {
  EllipticProblem prob{rho, dyn.delta, assemble_rhs(rho, dyn.params)};
  prob.expect_zero_mean = true;
  VelocitySolution sol = solve_velocity(prob);
  if (u_out != nullptr) *u_out = sol.u;
  return -dx(rho * sol.u);
}

struct SkewRhs {
  Field drho;
  Field dq;
};

SkewRhs rhs_skew(const Field& rho, const Field& q, const Dynamics& dyn,
                 Field* u_out) {
  const Params& p = dyn.params;
  Field kt = rho.map([&](double r) { return mu_eps_prime(r, p); });
  // -delta mubar dxx u + u = dx(kt dx q) + 1/2 dx(q q); multiplied by rho
  // this is the SPD system (-delta dxx + rho) u = rho w.
  Field w = dx(kt * dx(q)) + 0.5 * dx(q * q);
  EllipticProblem prob{rho, dyn.delta, rho * w};
  VelocitySolution sol = solve_velocity(prob);
  if (u_out != nullptr) *u_out = sol.u;
  return {-dx(rho * sol.u), -dx(kt * dx(sol.u)) - dx(sol.u * q)};
}

}  // namespace

Field flux_direct(const Field& rho, const Params& p) {
  Field g = dx(rho);
  Field kap = kappa_field(rho, p);
  Field kapp = rho.map([&](double r) { return kappa_eps_prime(r, p); });
  Field inner = dx(kap * g) - 0.5 * (kapp * g * g);
  return rho * dx(inner);
}

double stable_dt(const Field& rho, const Params& p,
                 const StepController& ctrl) {
  double a_max = 0.0;
  for (int i = 0; i < rho.size(); ++i) {
    a_max = std::max(a_max, rho[i] * kappa_eps(rho[i], p));
  }
  const Grid& g = rho.grid();
  double h4 = std::pow(g.h(), 4);
  return ctrl.safety * ctrl.cfl4 * h4 /
         (a_max * g.fourth_symbol_constant());
}

namespace {

// One RK4 attempt at fixed dt; domain errors (vacuum / non-finite)
// propagate to the rejection loop.
State rk4_attempt(const State& s, const Dynamics& dyn, double dt) {
  State out = s;
  out.t = s.t + dt;
  if (s.formulation == Formulation::Skew) {
    const Field& rho = s.rho;
    const Field& q = *s.q;
    SkewRhs k1 = rhs_skew(rho, q, dyn, nullptr);
    SkewRhs k2 = rhs_skew(rho + 0.5 * dt * k1.drho, q + 0.5 * dt * k1.dq,
                          dyn, nullptr);
    SkewRhs k3 = rhs_skew(rho + 0.5 * dt * k2.drho, q + 0.5 * dt * k2.dq,
                          dyn, nullptr);
    SkewRhs k4 = rhs_skew(rho + dt * k3.drho, q + dt * k3.dq, dyn, nullptr);
    out.rho = rho + (dt / 6.0) * (k1.drho + 2.0 * k2.drho + 2.0 * k3.drho +
                                  k4.drho);
    out.q = q + (dt / 6.0) * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
    Field u(rho.grid_ptr(), std::vector<double>(rho.size(), 0.0));
    SkewRhs probe = rhs_skew(out.rho, *out.q, dyn, &u);
    (void)probe;
    out.u = u;
  } else {
    auto f = [&](const Field& r) {
      return s.formulation == Formulation::Direct
                 ? rhs_direct(r, dyn)
                 : rhs_regularized(r, dyn, nullptr);
    };
    const Field& rho = s.rho;
    Field k1 = f(rho);
    Field k2 = f(rho + 0.5 * dt * k1);
    Field k3 = f(rho + 0.5 * dt * k2);
    Field k4 = f(rho + dt * k3);
    out.rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (s.formulation == Formulation::Regularized) {
      Field u(rho.grid_ptr(), std::vector<double>(rho.size(), 0.0));
      (void)rhs_regularized(out.rho, dyn, &u);
      out.u = u;
    }
  }
  if (!(out.rho.min() > 0.0)) {
    throw VacuumError("step produced nonpositive density", -1,
                      out.rho.min());
  }
  return out;
}

// Semi-implicit linear solve (I + dt dx(a dx3 .)) y = b.
Field semi_implicit_solve(const Field& b, const Field& a, double dt) {
  const Grid& g = b.grid();
  if (g.backend() == Backend::Fd4) {
    // compose the banded operator: c1 (dx) conv c2 (dxx) gives dx3, then
    // row i of dx(a dx3) is sum_s c1[s] a[i+s] c3[d-s]
    const int n = g.n();
    const double h = g.h();
    const double c1[5] = {1.0 / (12 * h), -8.0 / (12 * h), 0.0,
                          8.0 / (12 * h), -1.0 / (12 * h)};
    const double c2[5] = {-1.0 / (12 * h * h), 16.0 / (12 * h * h),
                          -30.0 / (12 * h * h), 16.0 / (12 * h * h),
                          -1.0 / (12 * h * h)};
    double c3[9] = {0};  // offsets -4..4
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        c3[(i - 2) + (j - 2) + 4] += c1[i] * c2[j];
      }
    }
    const int p = 6;
    std::vector<std::vector<double>> rows(
        n, std::vector<double>(2 * p + 1, 0.0));
    for (int i = 0; i < n; ++i) {
      for (int d = -p; d <= p; ++d) {
        double acc = 0.0;
        for (int sidx = 0; sidx < 5; ++sidx) {
          int sof = sidx - 2;
          int cof = d - sof;
          if (cof < -4 || cof > 4) continue;
          if (c1[sidx] == 0.0) continue;
          acc += c1[sidx] * a[(i + sof + n) % n] * c3[cof + 4];
        }
        rows[i][p + d] = dt * acc;
      }
      rows[i][p] += 1.0;
    }
    CyclicBanded m(n, p, std::move(rows));
    std::vector<double> sol =
        m.solve(std::vector<double>(b.values().begin(), b.values().end()));
    return Field(b.grid_ptr(), std::move(sol));
  }

  // spectral: preconditioned BiCGStab with the constant-coefficient
  // symbol 1 + dt abar k^4
  double abar = integrate(a) / g.length();
  auto apply = [&](const Field& v) { return v + dt * dx(a * dx(dxx(v))); };
  auto precond = [&](const Field& v) {
    return symbol_solve(v, 1.0, 0.0, dt * abar);
  };
  const double tol = 1e-12 * (1.0 + b.max_abs());
  Field x = Field::constant(b.grid_ptr(), 0.0);
  Field r = b;
  Field rhat = r;
  Field v = x, pdir = x;
  double rho_old = 1.0, alpha = 1.0, omega = 1.0;
  int it = 0;
  const int max_it = 600;
  while (r.max_abs() > tol && it < max_it) {
    double rho_new = dot(rhat, r);
    if (rho_new == 0.0) break;
    if (it == 0) {
      pdir = r;
    } else {
      double beta = (rho_new / rho_old) * (alpha / omega);
      pdir = r + beta * (pdir - omega * v);
    }
    Field phat = precond(pdir);
    v = apply(phat);
    alpha = rho_new / dot(rhat, v);
    Field sres = r - alpha * v;
    Field shat = precond(sres);
    Field tvec = apply(shat);
    double tt = dot(tvec, tvec);
    omega = (tt == 0.0) ? 0.0 : dot(tvec, sres) / tt;
    x = x + alpha * phat + omega * shat;
    r = sres - omega * tvec;
    rho_old = rho_new;
    ++it;
    if (omega == 0.0) break;
  }
  double res = max_abs_diff(apply(x), b);
  if (res > 1e-10 * (1.0 + b.max_abs())) {
    throw std::runtime_error(
        "step_semi_implicit: linear solve failed, residual " +
        std::to_string(res));
  }
  return x;
}

State semi_implicit_attempt(const State& s, const Dynamics& dyn, double dt) {
  const Field& rho = s.rho;
  Field fe = s.formulation == Formulation::Direct
                 ? rhs_direct(rho, dyn)
                 : rhs_regularized(rho, dyn, nullptr);
  Field a = rho * kappa_field(rho, dyn.params);
  Field incr = semi_implicit_solve(dt * fe, a, dt);
  State out = s;
  out.t = s.t + dt;
  out.rho = rho + incr;
  if (!(out.rho.min() > 0.0)) {
    throw VacuumError("semi-implicit step produced nonpositive density", -1,
                      out.rho.min());
  }
  if (s.formulation == Formulation::Regularized) {
    Field u(rho.grid_ptr(), std::vector<double>(rho.size(), 0.0));
    (void)rhs_regularized(out.rho, dyn, &u);
    out.u = u;
  }
  return out;
}

template <typename Attempt>
State reject_loop(const State& s, StepController& ctrl, Attempt&& attempt,
                  long* rejections) {
  for (;;) {
    if (ctrl.dt < ctrl.dt_min) {
      throw VacuumTermination(
          "step rejected below dt_min = " + std::to_string(ctrl.dt_min) +
          " at t = " + std::to_string(s.t));
    }
    try {
      return attempt(ctrl.dt);
    } catch (const std::domain_error&) {
      ctrl.dt *= 0.5;
      if (rejections != nullptr) ++(*rejections);
    }
  }
}

}  // namespace

State step_explicit(const State& s, const Dynamics& dyn,
                    StepController& ctrl) {
  return reject_loop(
      s, ctrl, [&](double dt) { return rk4_attempt(s, dyn, dt); }, nullptr);
}

State step_semi_implicit(const State& s, const Dynamics& dyn,
                         StepController& ctrl) {
  if (s.formulation == Formulation::Skew) {
    throw std::invalid_argument("step_semi_implicit: skew not supported");
  }
  return reject_loop(
      s, ctrl,
      [&](double dt) { return semi_implicit_attempt(s, dyn, dt); }, nullptr);
}

State step_regularized(const State& s, const Dynamics& dyn,
                       StepController& ctrl) {
  if (s.formulation != Formulation::Regularized) {
    throw std::invalid_argument("step_regularized: wrong formulation");
  }
  return step_explicit(s, dyn, ctrl);
}

State step_skew(const State& s, const Dynamics& dyn, StepController& ctrl) {
  if (s.formulation != Formulation::Skew || !s.q.has_value()) {
    throw std::invalid_argument("step_skew: wrong formulation");
  }
  return step_explicit(s, dyn, ctrl);
}

double skew_pairing_residual(const State& s, const Params& p) {
  if (!s.q || !s.u) return 0.0;
  Field kt = s.rho.map([&](double r) { return mu_eps_prime(r, p); });
  double p1 = integrate(dx(kt * dx(*s.u)) * (*s.q));
  double p2 = integrate(dx(kt * dx(*s.q)) * (*s.u));
  return std::abs(p1 - p2) / (1.0 + std::abs(p1) + std::abs(p2));
}

double skew_q_drift(const State& s, const Params& p) {
  if (!s.q) return 0.0;
  return max_abs_diff(*s.q, q_reference(s.rho, p));
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::TEnd: return "t_end";
    case Termination::Vacuum: return "vacuum";
    case Termination::DtUnderflow: return "dt_underflow";
    case Termination::UserAbort: return "user_abort";
  }
  return "t_end";
}

namespace {

struct SweepSample {
  double theta_h2 = 0.0, theta_grad4 = 0.0;
  double h2_mid = 0.0, g4_mid = 0.0, h2_neg = 0.0, g4_neg = 0.0;
};

SweepSample sweep_sample(const Field& rho, const Params& p,
                         const DiagRecord& d) {
  SweepSample s;
  s.theta_h2 = d.theta_h2;
  s.theta_grad4 = d.theta_grad4;
  double pm = 0.25 * (2.0 * p.beta + 3.0);
  Field h2m = dxx(power_field(rho, pm));
  Field g4m = dx(power_field(rho, 0.5 * pm));
  Field h2n = dxx(power_field(rho, -0.25));
  Field g4n = dx(power_field(rho, -0.125));
  s.h2_mid = integrate(h2m * h2m);
  s.g4_mid = integrate(g4m * g4m * g4m * g4m);
  s.h2_neg = integrate(h2n * h2n);
  s.g4_neg = integrate(g4n * g4n * g4n * g4n);
  return s;
}

}  // namespace

RunResult run(const RunConfig& cfg) {
  cfg.validate();
  GridPtr grid = make_grid(cfg.n, cfg.length, cfg.backend);
  Params p(cfg.beta, cfg.eps);

  Dynamics dyn{p};
  RunResult out;
  out.delta_used = cfg.delta_override.value_or(p.delta_eps);
  if (!cfg.delta_override && cfg.formulation != Formulation::Direct &&
      out.delta_used > 0.0 && out.delta_used < 1e-300) {
    out.delta_used = 0.0;
    out.delta_underflow = true;
  }
  dyn.delta = out.delta_used;

  Field rho0 = initial_density(cfg, grid);
  out.datum_lifted = cfg.preset.kind == PresetKind::Cosine &&
                     cfg.preset.amplitude >= 1.0;

  State s{0.0, cfg.formulation, rho0, std::nullopt, std::nullopt};
  if (cfg.formulation == Formulation::Skew) {
    s.q = q_reference(rho0, p);
  }
  if (cfg.formulation != Formulation::Direct) {
    Field u(grid, std::vector<double>(grid->n(), 0.0));
    if (cfg.formulation == Formulation::Regularized) {
      (void)rhs_regularized(rho0, dyn, &u);
    } else {
      (void)rhs_skew(rho0, *s.q, dyn, &u);
    }
    s.u = u;
  }

  StepController ctrl;
  ctrl.dt_min = cfg.dt_min;
  ctrl.dt_max = cfg.dt_max;
  ctrl.safety = cfg.safety;
  ctrl.cfl4 = cfg.cfl4;
  ctrl.adaptive = cfg.dt_init == 0.0;

  auto record = [&](const State& st) {
    DiagRecord d = diagnostics(st.t, st.rho, p,
                               st.u ? &*st.u : nullptr, dyn.delta);
    out.diagnostics.push_back(d);
    return d;
  };
  DiagRecord d0 = record(s);
  out.snapshots.push_back({s.t, s.rho});
  out.sweep.sup_rho_max = d0.rho_max;
  if (!p.excluded_flags[0]) {
    out.sweep.sup_energy_halfpower = energy_halfpower(s.rho, p);
  }
  if (p.eps > 0.0) out.sweep.khat_max = vacuum_exponent(s.rho, p);
  SweepSample prev_sample;
  if (cfg.track_sweep_stats) prev_sample = sweep_sample(s.rho, p, d0);

  const double t_end = cfg.t_end;
  long since_snapshot = 0;
  long since_reproject = 0;
  bool completed = t_end <= 0.0;

  while (!completed) {
    double remaining = t_end - s.t;
    if (remaining <= 1e-14 * t_end) {
      completed = true;
      break;
    }
    double dt_want;
    if (ctrl.adaptive) {
      dt_want = stable_dt(s.rho, p, ctrl);
      if (dt_want < ctrl.dt_min) {
        out.termination = Termination::DtUnderflow;
        break;
      }
      dt_want = std::min(dt_want, ctrl.dt_max);
    } else {
      dt_want = cfg.dt_init;
    }
    ctrl.dt = std::min(dt_want, remaining);

    State next = s;
    try {
      long rejected_before = out.steps_rejected;
      auto attempt = [&](double dt) {
        return cfg.integrator == Integrator::Explicit
                   ? rk4_attempt(s, dyn, dt)
                   : semi_implicit_attempt(s, dyn, dt);
      };
      for (;;) {
        if (ctrl.dt < ctrl.dt_min) {
          throw VacuumTermination("dt underflow during rejection at t = " +
                                  std::to_string(s.t));
        }
        try {
          next = attempt(ctrl.dt);
          break;
        } catch (const std::domain_error&) {
          ctrl.dt *= 0.5;
          ++out.steps_rejected;
        }
      }
      (void)rejected_before;
    } catch (const VacuumTermination&) {
      out.termination = Termination::Vacuum;
      break;
    }

    s = std::move(next);
    ++out.steps_accepted;
    ++since_snapshot;
    ++since_reproject;

    if (s.formulation == Formulation::Skew) {
      out.skew_pairing_max =
          std::max(out.skew_pairing_max, skew_pairing_residual(s, p));
      double drift = skew_q_drift(s, p);
      if (since_reproject >= dyn.reproject_every ||
          drift > dyn.q_drift_tol * (1.0 + s.q->max_abs())) {
        s.q = q_reference(s.rho, p);
        ++out.reprojections;
        since_reproject = 0;
      }
    }

    DiagRecord d = record(s);
    out.sweep.sup_rho_max = std::max(out.sweep.sup_rho_max, d.rho_max);
    if (!p.excluded_flags[0]) {
      out.sweep.sup_energy_halfpower = std::max(
          out.sweep.sup_energy_halfpower, energy_halfpower(s.rho, p));
    }
    if (p.eps > 0.0) {
      out.sweep.khat_max =
          std::max(out.sweep.khat_max, vacuum_exponent(s.rho, p));
    }
    if (cfg.track_sweep_stats) {
      SweepSample cur = sweep_sample(s.rho, p, d);
      double w = 0.5 * ctrl.dt;
      out.sweep.int_theta_h2 += w * (prev_sample.theta_h2 + cur.theta_h2);
      out.sweep.int_theta_grad4 +=
          w * (prev_sample.theta_grad4 + cur.theta_grad4);
      out.sweep.eps_int_h2_mid +=
          p.eps * w * (prev_sample.h2_mid + cur.h2_mid);
      out.sweep.eps_int_g4_mid +=
          p.eps * w * (prev_sample.g4_mid + cur.g4_mid);
      double e3 = p.eps * p.eps * p.eps;
      out.sweep.eps3_int_h2_neg += e3 * w * (prev_sample.h2_neg + cur.h2_neg);
      out.sweep.eps3_int_g4_neg += e3 * w * (prev_sample.g4_neg + cur.g4_neg);
      prev_sample = cur;
    }

    if (since_snapshot >= cfg.snapshot_every) {
      out.snapshots.push_back({s.t, s.rho});
      since_snapshot = 0;
    }
  }

  if (out.termination == Termination::TEnd && !completed) {
    // loop left via break with a non-TEnd reason already set
  }
  if (completed) out.termination = Termination::TEnd;

  if (out.snapshots.empty() || out.snapshots.back().t != s.t) {
    out.snapshots.push_back({s.t, s.rho});
  }
  out.final_state = s;

  if (out.snapshots.size() >= 3 && !p.excluded_flags[1] && s.t > 0.0) {
    out.weak_residual_final =
        weak_residual(out.snapshots, p, WeakBank::standard());
    out.diagnostics.back().weak_residual = out.weak_residual_final;
  }
  return out;
}

}  // namespace gflow
