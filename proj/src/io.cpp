#include "gflow/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gflow {

namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << body;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace

void write_snapshot(const std::string& path, const RunConfig& cfg, double t,
                    const Field& rho, const Field* u, const Field* q) {
  std::ostringstream os;
  os << "# beta=" << fmt17(cfg.beta) << "\n";
  os << "# eps=" << fmt17(cfg.eps) << "\n";
  os << "# n=" << rho.grid().n() << "\n";
  os << "# L=" << fmt17(rho.grid().length()) << "\n";
  os << "# t=" << fmt17(t) << "\n";
  os << "# formulation=" << to_string(cfg.formulation) << "\n";
  os << "# columns=x rho";
  if (u != nullptr) os << " u";
  if (q != nullptr) os << " q";
  os << "\n";
  for (int i = 0; i < rho.size(); ++i) {
    os << fmt17(rho.grid().x(i)) << " " << fmt17(rho[i]);
    if (u != nullptr) os << " " << fmt17((*u)[i]);
    if (q != nullptr) os << " " << fmt17((*q)[i]);
    os << "\n";
  }
  write_text(path, os.str());
}

void write_diagnostics_csv(const std::string& path,
                           const std::vector<DiagRecord>& records) {
  std::ostringstream os;
  os << DiagRecord::csv_header() << "\n";
  for (const auto& r : records) os << r.csv_row() << "\n";
  write_text(path, os.str());
}

void write_run_meta(const std::string& path, const RunConfig& cfg,
                    const RunResult& result, double wall_seconds) {
  nlohmann::json j;
  j["config"] = nlohmann::json{
      {"beta", cfg.beta},
      {"eps", cfg.eps},
      {"formulation", to_string(cfg.formulation)},
      {"backend", to_string(cfg.backend)},
      {"integrator", to_string(cfg.integrator)},
      {"n", cfg.n},
      {"length", cfg.length},
      {"t_end", cfg.t_end},
      {"dt_init", cfg.dt_init},
      {"dt_min", cfg.dt_min},
      {"dt_max", cfg.dt_max},
      {"safety", cfg.safety},
      {"cfl4", cfg.cfl4},
      {"snapshot_every", cfg.snapshot_every},
      {"preset", cfg.preset.to_string()},
      {"seed", cfg.seed},
      {"vacuum_lift", cfg.vacuum_lift},
      {"track_sweep_stats", cfg.track_sweep_stats},
  };
  if (cfg.delta_override) j["config"]["delta_override"] = *cfg.delta_override;
  j["termination"] = to_string(result.termination);
  j["steps_accepted"] = result.steps_accepted;
  j["steps_rejected"] = result.steps_rejected;
  j["reprojections"] = result.reprojections;
  j["delta_used"] = result.delta_used;
  j["delta_underflow"] = result.delta_underflow;
  j["datum_lifted"] = result.datum_lifted;
  j["skew_pairing_max"] = result.skew_pairing_max;
  j["weak_residual_final"] = result.weak_residual_final;
  j["sweep"] = nlohmann::json{
      {"sup_energy_halfpower", result.sweep.sup_energy_halfpower},
      {"sup_rho_max", result.sweep.sup_rho_max},
      {"int_theta_h2", result.sweep.int_theta_h2},
      {"int_theta_grad4", result.sweep.int_theta_grad4},
      {"eps_int_h2_mid", result.sweep.eps_int_h2_mid},
      {"eps_int_g4_mid", result.sweep.eps_int_g4_mid},
      {"eps3_int_h2_neg", result.sweep.eps3_int_h2_neg},
      {"eps3_int_g4_neg", result.sweep.eps3_int_g4_neg},
      {"khat_max", result.sweep.khat_max},
  };
  j["wall_time_seconds"] = wall_seconds;
  write_text(path, j.dump(2) + "\n");
}

std::string persist_run(const std::string& outdir, const RunConfig& cfg,
                        const RunResult& result, double wall_seconds) {
  namespace fs = std::filesystem;
  fs::create_directories(outdir);
  fs::create_directories(outdir + "/snapshots");

  write_text(outdir + "/config_echo.cfg", config_echo(cfg));
  write_diagnostics_csv(outdir + "/diagnostics.csv", result.diagnostics);

  const Field* u = nullptr;
  const Field* q = nullptr;
  for (std::size_t i = 0; i < result.snapshots.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "/snapshots/snap_%06zu.dat", i);
    // velocity/q columns are only stored for the final state, where they
    // are available without re-solving
    bool is_final = result.final_state &&
                    result.snapshots[i].t == result.final_state->t;
    u = (is_final && result.final_state->u) ? &*result.final_state->u
                                            : nullptr;
    q = (is_final && result.final_state->q) ? &*result.final_state->q
                                            : nullptr;
    write_snapshot(outdir + name, cfg, result.snapshots[i].t,
                   result.snapshots[i].rho, u, q);
  }
  std::string meta = outdir + "/run_meta.json";
  write_run_meta(meta, cfg, result, wall_seconds);
  return meta;
}

}  // namespace gflow
