#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gflow/grid.hpp"

namespace gflow {

enum class Formulation { Direct, Regularized, Skew };
enum class Integrator { Explicit, SemiImplicit };

enum class PresetKind { Constant, Cosine, ExpSin, Bump, Qdd, ThinFilm };

struct Preset {
  PresetKind kind = PresetKind::Cosine;
  double amplitude = 0.25;  // cosine / expsin amplitude
  int wavenumber = 1;       // cosine wavenumber
  double floor = 1e-4;      // bump floor

  /// Parses "constant", "cosine(0.25,1)", "expsin(0.3)", "bump(1e-4)",
  /// "qdd", "thinfilm"; bare names use defaults.
  static Preset parse(const std::string& text);
  std::string to_string() const;
};

/// Thrown on malformed or inconsistent configuration; maps to exit 64.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct RunConfig {
  double beta = 0.0;
  double eps = 0.0;
  Formulation formulation = Formulation::Direct;
  Backend backend = Backend::Spectral;
  Integrator integrator = Integrator::Explicit;
  int n = 256;
  double length = 1.0;
  double t_end = 1e-3;
  double dt_init = 0.0;  // 0 = controller picks
  double dt_min = 1e-15;
  double dt_max = 1e-2;
  double safety = 0.8;
  double cfl4 = 0.25;
  int snapshot_every = 100;
  Preset preset;
  std::uint64_t seed = 0;
  std::string outdir;
  std::optional<double> delta_override;  // artificial delta, non-default
  double vacuum_lift = 1e-4;
  bool track_sweep_stats = false;

  /// Validates mutual consistency; throws ConfigError.
  void validate() const;
};

struct ConvergenceConfig {
  std::string study = "time";  // time | space | weak
  std::vector<double> dt_ladder;
  std::vector<int> n_ladder;
  RunConfig base;
};

struct SweepConfig {
  std::vector<double> eps_list;
  std::vector<double> beta_list;
  int jobs = 1;
  RunConfig base;
};

/// Flat key=value text with optional [section] headers (organizational
/// only; keys are global and must be unique).  '#' starts a comment.
std::map<std::string, std::string> parse_key_values(const std::string& text);
std::map<std::string, std::string> load_key_values(const std::string& path);

RunConfig run_config_from_map(const std::map<std::string, std::string>& kv);
ConvergenceConfig convergence_config_from_map(
    const std::map<std::string, std::string>& kv);
SweepConfig sweep_config_from_map(
    const std::map<std::string, std::string>& kv);

/// Exact reproduction echo of a resolved run configuration.
std::string config_echo(const RunConfig& cfg);

std::string to_string(Formulation f);
std::string to_string(Integrator i);
std::string to_string(Backend b);

/// Initial density for a preset on a grid; qdd/thinfilm force beta and are
/// resolved by RunConfig::validate.
Field initial_density(const RunConfig& cfg, GridPtr grid);

}  // namespace gflow
