// gflow: structure-preserving solver and verification lab for the 1D
// fourth-order gradient-flow family kappa(rho) = rho^beta on the torus.
//
// Subcommands: run, verify, convergence, sweep.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gflow/config.hpp"
#include "gflow/evolution.hpp"
#include "gflow/identity_lab.hpp"
#include "gflow/io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitVacuum = 2;
constexpr int kExitDtUnderflow = 3;
constexpr int kExitConfig = 64;

struct CommonOpts {
  std::string config_path;
  std::string outdir;
  std::string backend;
  int jobs = 1;
  bool quiet = false;
};

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const auto start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

int termination_exit(gflow::Termination t) {
  switch (t) {
    case gflow::Termination::TEnd: return kExitOk;
    case gflow::Termination::Vacuum: return kExitVacuum;
    case gflow::Termination::DtUnderflow: return kExitDtUnderflow;
    case gflow::Termination::UserAbort: return kExitFailed;
  }
  return kExitFailed;
}

void apply_overrides(gflow::RunConfig& cfg, const CommonOpts& opts) {
  if (!opts.outdir.empty()) cfg.outdir = opts.outdir;
  if (!opts.backend.empty()) {
    if (opts.backend == "spectral") {
      cfg.backend = gflow::Backend::Spectral;
    } else if (opts.backend == "fd4") {
      cfg.backend = gflow::Backend::Fd4;
    } else {
      throw gflow::ConfigError("--backend must be spectral or fd4");
    }
  }
}

int cmd_run(const CommonOpts& opts) {
  gflow::RunConfig cfg;
  try {
    cfg = gflow::run_config_from_map(gflow::load_key_values(opts.config_path));
    apply_overrides(cfg, opts);
    if (cfg.outdir.empty()) {
      throw gflow::ConfigError("run: no outdir given (config or --outdir)");
    }
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  double t0 = now_seconds();
  gflow::RunResult result;
  try {
    result = gflow::run(cfg);
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kExitFailed;
  }
  gflow::persist_run(cfg.outdir, cfg, result, now_seconds() - t0);
  if (!opts.quiet) {
    std::cout << "run: " << gflow::to_string(result.termination) << ", "
              << result.steps_accepted << " steps ("
              << result.steps_rejected << " rejected), outputs in "
              << cfg.outdir << "\n";
  }
  return termination_exit(result.termination);
}

gflow::IdentityReport worst_over_eps(
    const gflow::TrialBank& bank, double beta,
    const std::vector<double>& eps_set,
    gflow::IdentityReport (*fn)(const gflow::TrialBank&,
                                const gflow::Params&)) {
  gflow::IdentityReport worst;
  bool first = true;
  for (double eps : eps_set) {
    gflow::IdentityReport r = fn(bank, gflow::Params(beta, eps));
    if (first || r.max_residual > worst.max_residual) {
      worst = r;
      first = false;
    }
    if (!r.passed) worst.passed = false;
  }
  return worst;
}

int cmd_verify(const std::vector<double>& beta_list, int n,
               std::uint64_t seed, const CommonOpts& opts) {
  namespace fs = std::filesystem;
  if (beta_list.empty()) {
    std::cerr << "config error: empty beta list\n";
    return kExitConfig;
  }
  for (double beta : beta_list) {
    try {
      gflow::Params p(beta, 0.0);
      if (p.log_branch()) {
        std::cerr << "config error: beta = " << beta
                  << " is excluded for the entropy/identity machinery\n";
        return kExitConfig;
      }
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitConfig;
    }
  }
  std::string outdir = opts.outdir.empty() ? "verify_out" : opts.outdir;
  fs::create_directories(outdir);

  const std::vector<double> eps_set = {0.0, 0.1, 0.5};
  bool all_passed = true;
  gflow::GridPtr grid;
  try {
    grid = gflow::make_grid(n, 1.0, gflow::Backend::Spectral);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  for (double beta : beta_list) {
    gflow::TrialBank bank = gflow::TrialBank::standard(grid, seed);
    std::vector<gflow::IdentityReport> reports;
    reports.push_back(worst_over_eps(bank, beta, eps_set,
                                     &gflow::report_first_variation));
    reports.push_back(worst_over_eps(bank, beta, eps_set,
                                     &gflow::report_integral_identity));
    reports.push_back(
        gflow::report_entropy_flux(bank, gflow::Params(beta, 0.0)));
    {
      gflow::IdentityReport worst;
      bool first = true;
      for (double eps : eps_set) {
        auto r = gflow::check_kort_inequality(bank, gflow::Params(beta, eps));
        if (first || r.constant_estimate > worst.constant_estimate) {
          worst = r;
          first = false;
        }
        if (!r.passed) worst.passed = false;
      }
      reports.push_back(worst);
    }
    reports.push_back(gflow::check_lemma_a(bank, beta));
    {
      auto ft = gflow::check_four_thirds(bank, beta);
      auto bn = gflow::check_bernis(bank, beta);
      gflow::IdentityReport combined = ft;
      combined.name = "four_thirds_bernis";
      combined.constant_estimate = bn.constant_estimate;
      combined.passed = ft.passed && bn.passed;
      reports.push_back(combined);
    }
    for (const auto& r : reports) {
      char fname[128];
      std::snprintf(fname, sizeof(fname), "%s/report_%s_beta_%g.json",
                    outdir.c_str(), r.name.c_str(), beta);
      std::ofstream out(fname, std::ios::binary);
      out << gflow::report_to_json(r) << "\n";
      all_passed = all_passed && r.passed;
      if (!opts.quiet) {
        std::printf("%-20s beta=%-7g residual=%.3e const=%.4g %s\n",
                    r.name.c_str(), beta, r.max_residual,
                    r.constant_estimate, r.passed ? "PASS" : "FAIL");
      }
    }
  }
  if (!all_passed) {
    std::cerr << "verify: one or more identity checks failed\n";
    return kExitFailed;
  }
  return kExitOk;
}

int cmd_convergence(const CommonOpts& opts) {
  gflow::ConvergenceConfig cfg;
  try {
    cfg = gflow::convergence_config_from_map(
        gflow::load_key_values(opts.config_path));
    apply_overrides(cfg.base, opts);
    if (cfg.base.outdir.empty()) {
      throw gflow::ConfigError("convergence: no outdir given");
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  std::filesystem::create_directories(cfg.base.outdir);
  nlohmann::json j;
  j["study"] = cfg.study;

  auto pinned = [&](double dt, int n) {
    gflow::RunConfig c = cfg.base;
    c.dt_init = dt;
    c.n = n;
    c.outdir.clear();
    return c;
  };

  try {
    if (cfg.study == "time") {
      std::vector<gflow::Field> finals;
      for (double dt : cfg.dt_ladder) {
        auto res = gflow::run(pinned(dt, cfg.base.n));
        if (res.termination != gflow::Termination::TEnd) {
          throw std::runtime_error("ladder leg terminated early: " +
                                   gflow::to_string(res.termination));
        }
        finals.push_back(res.final_state->rho);
      }
      std::vector<double> errors, orders;
      for (std::size_t i = 0; i + 1 < finals.size(); ++i) {
        errors.push_back(gflow::max_abs_diff(finals[i], finals[i + 1]));
      }
      for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        double r = cfg.dt_ladder[i] / cfg.dt_ladder[i + 1];
        orders.push_back(std::log(errors[i] / errors[i + 1]) / std::log(r));
      }
      j["dt_ladder"] = cfg.dt_ladder;
      j["errors"] = errors;
      j["orders"] = orders;
    } else if (cfg.study == "space") {
      if (cfg.base.dt_init <= 0.0) {
        throw gflow::ConfigError("space study needs pinned dt_init > 0");
      }
      std::vector<gflow::Field> finals;
      for (int n : cfg.n_ladder) {
        auto res = gflow::run(pinned(cfg.base.dt_init, n));
        if (res.termination != gflow::Termination::TEnd) {
          throw std::runtime_error("ladder leg terminated early");
        }
        finals.push_back(res.final_state->rho);
      }
      std::vector<double> errors, orders;
      for (std::size_t i = 0; i + 1 < finals.size(); ++i) {
        const gflow::Field& coarse = finals[i];
        const gflow::Field& fine = finals[i + 1];
        int ratio = fine.size() / coarse.size();
        if (ratio * coarse.size() != fine.size()) {
          throw gflow::ConfigError("n_ladder entries must nest");
        }
        double err = 0.0;
        for (int k = 0; k < coarse.size(); ++k) {
          err = std::max(err, std::abs(coarse[k] - fine[k * ratio]));
        }
        errors.push_back(err);
      }
      bool saturated = true;
      for (double e : errors) saturated = saturated && e < 1e-12;
      for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        double r = double(cfg.n_ladder[i + 1]) / cfg.n_ladder[i];
        orders.push_back(std::log(errors[i] / errors[i + 1]) / std::log(r));
      }
      j["n_ladder"] = cfg.n_ladder;
      j["errors"] = errors;
      j["orders"] = orders;
      j["saturated"] = saturated;
    } else {  // weak
      std::vector<double> residuals;
      for (std::size_t i = 0; i < cfg.n_ladder.size(); ++i) {
        gflow::RunConfig c = pinned(cfg.dt_ladder[i], cfg.n_ladder[i]);
        auto res = gflow::run(c);
        if (res.termination != gflow::Termination::TEnd) {
          throw std::runtime_error("ladder leg terminated early");
        }
        residuals.push_back(res.weak_residual_final);
      }
      bool decreasing = true;
      for (std::size_t i = 0; i + 1 < residuals.size(); ++i) {
        decreasing = decreasing && residuals[i + 1] < residuals[i];
      }
      j["n_ladder"] = cfg.n_ladder;
      j["dt_ladder"] = cfg.dt_ladder;
      j["weak_residuals"] = residuals;
      j["decreasing"] = decreasing;
      j["final_residual"] = residuals.back();
    }
  } catch (const gflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "convergence failed: " << e.what() << "\n";
    return kExitFailed;
  }

  std::ofstream out(cfg.base.outdir + "/convergence.json", std::ios::binary);
  out << j.dump(2) << "\n";
  if (!opts.quiet) std::cout << j.dump(2) << "\n";
  return kExitOk;
}

struct SweepLeg {
  gflow::RunConfig cfg;
  bool config_ok = false;
  std::string error;
  gflow::RunResult result;
  int exit_code = kExitFailed;
  bool done = false;
};

int cmd_sweep(const CommonOpts& opts) {
  gflow::SweepConfig cfg;
  try {
    cfg = gflow::sweep_config_from_map(
        gflow::load_key_values(opts.config_path));
    apply_overrides(cfg.base, opts);
    if (opts.jobs > 0) cfg.jobs = opts.jobs;
    if (cfg.base.outdir.empty()) {
      throw gflow::ConfigError("sweep: no outdir given");
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  std::filesystem::create_directories(cfg.base.outdir);

  std::vector<SweepLeg> legs;
  for (double beta : cfg.beta_list) {
    for (double eps : cfg.eps_list) {
      SweepLeg leg;
      leg.cfg = cfg.base;
      leg.cfg.beta = beta;
      leg.cfg.eps = eps;
      leg.cfg.track_sweep_stats = true;
      char sub[96];
      std::snprintf(sub, sizeof(sub), "/leg_beta_%g_eps_%g", beta, eps);
      leg.cfg.outdir = cfg.base.outdir + sub;
      try {
        leg.cfg.validate();
        leg.config_ok = true;
      } catch (const std::exception& e) {
        leg.error = e.what();
        leg.exit_code = kExitConfig;
        leg.done = true;
      }
      legs.push_back(std::move(leg));
    }
  }

  auto run_leg = [](SweepLeg* leg) {
    double t0 = now_seconds();
    try {
      leg->result = gflow::run(leg->cfg);
      gflow::persist_run(leg->cfg.outdir, leg->cfg, leg->result,
                         now_seconds() - t0);
      leg->exit_code = termination_exit(leg->result.termination);
    } catch (const std::exception& e) {
      leg->error = e.what();
      leg->exit_code = kExitFailed;
    }
    leg->done = true;
  };

  // legs share nothing mutable; batches of up to --jobs threads
  std::vector<SweepLeg*> pending;
  for (auto& leg : legs) {
    if (!leg.done) pending.push_back(&leg);
  }
  for (std::size_t i = 0; i < pending.size(); i += cfg.jobs) {
    std::vector<std::thread> pool;
    for (std::size_t k = i; k < std::min(i + cfg.jobs, pending.size());
         ++k) {
      pool.emplace_back(run_leg, pending[k]);
    }
    for (auto& th : pool) th.join();
  }

  // combined CSV in config order
  std::ostringstream csv;
  csv << "beta,eps,termination,sup_energy_halfpower,sup_rho_max,"
         "int_theta_h2,int_theta_grad4,eps_int_h2_mid,eps_int_g4_mid,"
         "eps3_int_h2_neg,eps3_int_g4_neg,khat_max\n";
  bool any_failed = false;
  for (const auto& leg : legs) {
    char row[512];
    if (leg.exit_code == kExitOk) {
      const auto& s = leg.result.sweep;
      std::snprintf(row, sizeof(row),
                    "%.17g,%.17g,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                    "%.17g,%.17g,%.17g\n",
                    leg.cfg.beta, leg.cfg.eps,
                    gflow::to_string(leg.result.termination).c_str(),
                    s.sup_energy_halfpower, s.sup_rho_max, s.int_theta_h2,
                    s.int_theta_grad4, s.eps_int_h2_mid, s.eps_int_g4_mid,
                    s.eps3_int_h2_neg, s.eps3_int_g4_neg, s.khat_max);
    } else {
      any_failed = true;
      std::snprintf(row, sizeof(row), "%.17g,%.17g,failed,,,,,,,,,\n",
                    leg.cfg.beta, leg.cfg.eps);
      if (!opts.quiet) {
        std::cerr << "sweep leg beta=" << leg.cfg.beta
                  << " eps=" << leg.cfg.eps << " failed: " << leg.error
                  << "\n";
      }
    }
    csv << row;
  }
  std::ofstream out(cfg.base.outdir + "/sweep_summary.csv",
                    std::ios::binary);
  out << csv.str();
  if (!opts.quiet) {
    std::cout << "sweep: " << legs.size() << " legs, summary in "
              << cfg.base.outdir << "/sweep_summary.csv\n";
  }
  return any_failed ? kExitFailed : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "1D fourth-order gradient-flow solver and verification lab on the "
      "periodic torus"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::vector<double> beta_list;
  int verify_n = 256;
  std::uint64_t verify_seed = 0;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config) {
      sub->add_option("--config", opts.config_path, "config file path")
          ->required();
    }
    sub->add_option("--outdir", opts.outdir, "output directory override");
    sub->add_option("--backend", opts.backend,
                    "differentiation backend override (spectral|fd4)");
    sub->add_option("--jobs", opts.jobs, "concurrent sweep legs");
    sub->add_flag("--quiet", opts.quiet, "suppress progress output");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "time-step one configuration");
  add_common(run_cmd, true);
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "identity verification suite");
  verify_cmd
      ->add_option("--beta", beta_list,
                   "beta values to verify (comma separated)")
      ->delimiter(',')
      ->required();
  verify_cmd->add_option("--n", verify_n, "grid size (power of two)");
  verify_cmd->add_option("--seed", verify_seed, "trial-bank seed");
  add_common(verify_cmd, false);
  CLI::App* conv_cmd =
      app.add_subcommand("convergence", "refinement-order study");
  add_common(conv_cmd, true);
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "beta/eps sweep with combined diagnostics");
  add_common(sweep_cmd, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (run_cmd->parsed()) return cmd_run(opts);
  if (verify_cmd->parsed())
    return cmd_verify(beta_list, verify_n, verify_seed, opts);
  if (conv_cmd->parsed()) return cmd_convergence(opts);
  if (sweep_cmd->parsed()) return cmd_sweep(opts);
  return kExitConfig;
}
