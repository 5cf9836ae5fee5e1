#pragma once

#include <string>

#include "gflow/config.hpp"
#include "gflow/evolution.hpp"

namespace gflow {

/// Snapshot file: '#' key=value header lines (beta, eps, n, L, t,
/// formulation), then one row per node: x and the field values at 17
/// significant digits.
void write_snapshot(const std::string& path, const RunConfig& cfg,
                    double t, const Field& rho, const Field* u = nullptr,
                    const Field* q = nullptr);

void write_diagnostics_csv(const std::string& path,
                           const std::vector<DiagRecord>& records);

/// Run metadata JSON: config echo, termination reason, step and rejection
/// counts, wall time.  Wall time is excluded from the determinism
/// contract; everything else is byte-stable.
void write_run_meta(const std::string& path, const RunConfig& cfg,
                    const RunResult& result, double wall_seconds);

/// Persist a completed run: config_echo.cfg, diagnostics.csv,
/// snapshots/snap_NNNNNN.dat, run_meta.json.  Returns the meta path.
std::string persist_run(const std::string& outdir, const RunConfig& cfg,
                        const RunResult& result, double wall_seconds);

}  // namespace gflow
