#include "gflow/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gflow {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for '" + key + "': " + v);
  }
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    int d = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for '" + key + "': " + v);
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: bad boolean for '" + key + "': " + v);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Preset Preset::parse(const std::string& text) {
  std::string t = trim(text);
  std::string name = t;
  std::vector<std::string> args;
  std::size_t open = t.find('(');
  if (open != std::string::npos) {
    if (t.back() != ')') throw ConfigError("preset: unbalanced '(': " + t);
    name = trim(t.substr(0, open));
    std::string inner = t.substr(open + 1, t.size() - open - 2);
    if (!trim(inner).empty()) args = split(inner, ',');
  }
  Preset p;
  if (name == "constant") {
    p.kind = PresetKind::Constant;
  } else if (name == "cosine") {
    p.kind = PresetKind::Cosine;
    if (args.size() > 0) p.amplitude = to_double("preset amplitude", args[0]);
    if (args.size() > 1) p.wavenumber = to_int("preset wavenumber", args[1]);
    if (args.size() > 2) throw ConfigError("preset cosine takes (a,k)");
  } else if (name == "expsin") {
    p.kind = PresetKind::ExpSin;
    if (args.size() > 0) p.amplitude = to_double("preset amplitude", args[0]);
    if (args.size() > 1) throw ConfigError("preset expsin takes (a)");
  } else if (name == "bump") {
    p.kind = PresetKind::Bump;
    if (args.size() > 0) p.floor = to_double("preset floor", args[0]);
    if (args.size() > 1) throw ConfigError("preset bump takes (floor)");
  } else if (name == "qdd") {
    p.kind = PresetKind::Qdd;
  } else if (name == "thinfilm") {
    p.kind = PresetKind::ThinFilm;
  } else {
    throw ConfigError("preset: unknown name '" + name + "'");
  }
  return p;
}

std::string Preset::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case PresetKind::Constant: return "constant";
    case PresetKind::Cosine:
      os << "cosine(" << fmt(amplitude) << "," << wavenumber << ")";
      return os.str();
    case PresetKind::ExpSin:
      os << "expsin(" << fmt(amplitude) << ")";
      return os.str();
    case PresetKind::Bump:
      os << "bump(" << fmt(floor) << ")";
      return os.str();
    case PresetKind::Qdd: return "qdd";
    case PresetKind::ThinFilm: return "thinfilm";
  }
  return "constant";
}

void RunConfig::validate() const {
  try {
    Params check(beta, eps);
    (void)check;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (backend == Backend::Spectral && (n & (n - 1)) != 0) {
    throw ConfigError("config: spectral backend needs power-of-two n");
  }
  if (n < 16) throw ConfigError("config: n must be >= 16");
  if (!(length > 0.0)) throw ConfigError("config: length must be positive");
  if (t_end < 0.0) throw ConfigError("config: t_end must be >= 0");
  if (formulation != Formulation::Direct && !(eps > 0.0)) {
    throw ConfigError(
        "config: regularized/skew formulations require eps > 0");
  }
  Params p(beta, eps);
  if (formulation != Formulation::Direct && p.log_branch()) {
    throw ConfigError(
        "config: beta in {-2,-5/3,-3/2,-1} excluded for the eps-family "
        "formulations");
  }
  if (integrator == Integrator::SemiImplicit &&
      formulation == Formulation::Skew) {
    throw ConfigError("config: semi-implicit integrator supports direct "
                      "and regularized formulations only");
  }
  if (dt_min <= 0.0 || dt_max < dt_min) {
    throw ConfigError("config: need 0 < dt_min <= dt_max");
  }
  if (snapshot_every < 1) {
    throw ConfigError("config: snapshot_every must be >= 1");
  }
  if (preset.kind == PresetKind::Qdd && std::abs(beta + 1.0) > 1e-12) {
    throw ConfigError("config: qdd preset requires beta = -1");
  }
  if (preset.kind == PresetKind::ThinFilm && std::abs(beta) > 1e-12) {
    throw ConfigError("config: thinfilm preset requires beta = 0");
  }
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::string t = trim(line);
    std::size_t hash = t.find('#');
    if (hash != std::string::npos) t = trim(t.substr(0, hash));
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": bad section header");
      }
      continue;  // sections are organizational only
    }
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key");
    }
    if (kv.count(key)) {
      throw ConfigError("config: duplicate key '" + key + "'");
    }
    kv[key] = val;
  }
  return kv;
}

std::map<std::string, std::string> load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

namespace {

Formulation parse_formulation(const std::string& v) {
  if (v == "direct") return Formulation::Direct;
  if (v == "regularized") return Formulation::Regularized;
  if (v == "skew") return Formulation::Skew;
  throw ConfigError("config: unknown formulation '" + v + "'");
}

Backend parse_backend(const std::string& v) {
  if (v == "spectral") return Backend::Spectral;
  if (v == "fd4") return Backend::Fd4;
  throw ConfigError("config: unknown backend '" + v + "'");
}

Integrator parse_integrator(const std::string& v) {
  if (v == "explicit") return Integrator::Explicit;
  if (v == "semi_implicit") return Integrator::SemiImplicit;
  throw ConfigError("config: unknown integrator '" + v + "'");
}

// Consumes recognized run keys from kv; leaves others in place.
RunConfig run_config_consume(std::map<std::string, std::string>& kv) {
  RunConfig c;
  auto take = [&](const char* key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  if (auto v = take("beta")) c.beta = to_double("beta", *v);
  if (auto v = take("eps")) c.eps = to_double("eps", *v);
  if (auto v = take("formulation")) c.formulation = parse_formulation(*v);
  if (auto v = take("backend")) c.backend = parse_backend(*v);
  if (auto v = take("integrator")) c.integrator = parse_integrator(*v);
  if (auto v = take("n")) c.n = to_int("n", *v);
  if (auto v = take("length")) c.length = to_double("length", *v);
  if (auto v = take("t_end")) c.t_end = to_double("t_end", *v);
  if (auto v = take("dt_init")) c.dt_init = to_double("dt_init", *v);
  if (auto v = take("dt_min")) c.dt_min = to_double("dt_min", *v);
  if (auto v = take("dt_max")) c.dt_max = to_double("dt_max", *v);
  if (auto v = take("safety")) c.safety = to_double("safety", *v);
  if (auto v = take("cfl4")) c.cfl4 = to_double("cfl4", *v);
  if (auto v = take("snapshot_every"))
    c.snapshot_every = to_int("snapshot_every", *v);
  if (auto v = take("preset")) c.preset = Preset::parse(*v);
  if (auto v = take("seed"))
    c.seed = static_cast<std::uint64_t>(std::stoull(*v));
  if (auto v = take("outdir")) c.outdir = *v;
  if (auto v = take("delta_override"))
    c.delta_override = to_double("delta_override", *v);
  if (auto v = take("vacuum_lift")) c.vacuum_lift = to_double("vacuum_lift", *v);
  if (auto v = take("track_sweep_stats"))
    c.track_sweep_stats = to_bool("track_sweep_stats", *v);

  // qdd / thinfilm presets pin beta
  if (c.preset.kind == PresetKind::Qdd) c.beta = -1.0;
  if (c.preset.kind == PresetKind::ThinFilm) c.beta = 0.0;
  return c;
}

void reject_leftovers(const std::map<std::string, std::string>& kv) {
  if (!kv.empty()) {
    throw ConfigError("config: unknown key '" + kv.begin()->first + "'");
  }
}

}  // namespace

RunConfig run_config_from_map(const std::map<std::string, std::string>& kv) {
  auto copy = kv;
  RunConfig c = run_config_consume(copy);
  reject_leftovers(copy);
  c.validate();
  return c;
}

ConvergenceConfig convergence_config_from_map(
    const std::map<std::string, std::string>& kv) {
  auto copy = kv;
  ConvergenceConfig c;
  if (auto it = copy.find("study"); it != copy.end()) {
    c.study = it->second;
    copy.erase(it);
  }
  if (c.study != "time" && c.study != "space" && c.study != "weak") {
    throw ConfigError("config: study must be time, space, or weak");
  }
  if (auto it = copy.find("dt_ladder"); it != copy.end()) {
    for (const auto& s : split(it->second, ',')) {
      c.dt_ladder.push_back(to_double("dt_ladder", s));
    }
    copy.erase(it);
  }
  if (auto it = copy.find("n_ladder"); it != copy.end()) {
    for (const auto& s : split(it->second, ',')) {
      c.n_ladder.push_back(to_int("n_ladder", s));
    }
    copy.erase(it);
  }
  c.base = run_config_consume(copy);
  reject_leftovers(copy);
  c.base.validate();

  auto check_ladder = [](auto& v, const char* what, bool decreasing) {
    if (v.size() < 2) {
      throw ConfigError(std::string("config: ") + what +
                        " needs at least 2 entries");
    }
    for (std::size_t i = 1; i < v.size(); ++i) {
      bool ok = decreasing ? v[i] < v[i - 1] : v[i] > v[i - 1];
      if (!ok) {
        throw ConfigError(std::string("config: ") + what +
                          " must be strictly monotone");
      }
    }
  };
  if (c.study == "time") check_ladder(c.dt_ladder, "dt_ladder", true);
  if (c.study == "space") check_ladder(c.n_ladder, "n_ladder", false);
  if (c.study == "weak") {
    check_ladder(c.n_ladder, "n_ladder", false);
    check_ladder(c.dt_ladder, "dt_ladder", true);
    if (c.n_ladder.size() != c.dt_ladder.size()) {
      throw ConfigError("config: weak study needs matching n/dt ladders");
    }
  }
  return c;
}

SweepConfig sweep_config_from_map(
    const std::map<std::string, std::string>& kv) {
  auto copy = kv;
  SweepConfig c;
  if (auto it = copy.find("eps_list"); it != copy.end()) {
    for (const auto& s : split(it->second, ','))
      c.eps_list.push_back(to_double("eps_list", s));
    copy.erase(it);
  }
  if (auto it = copy.find("beta_list"); it != copy.end()) {
    for (const auto& s : split(it->second, ','))
      c.beta_list.push_back(to_double("beta_list", s));
    copy.erase(it);
  }
  if (auto it = copy.find("jobs"); it != copy.end()) {
    c.jobs = to_int("jobs", it->second);
    copy.erase(it);
  }
  c.base = run_config_consume(copy);
  reject_leftovers(copy);
  if (c.eps_list.empty()) c.eps_list.push_back(c.base.eps);
  if (c.beta_list.empty()) c.beta_list.push_back(c.base.beta);
  if (c.jobs < 1) throw ConfigError("config: jobs must be >= 1");
  return c;
}

std::string to_string(Formulation f) {
  switch (f) {
    case Formulation::Direct: return "direct";
    case Formulation::Regularized: return "regularized";
    case Formulation::Skew: return "skew";
  }
  return "direct";
}

std::string to_string(Integrator i) {
  return i == Integrator::Explicit ? "explicit" : "semi_implicit";
}

std::string to_string(Backend b) {
  return b == Backend::Spectral ? "spectral" : "fd4";
}

std::string config_echo(const RunConfig& c) {
  std::ostringstream os;
  os << "[run]\n";
  os << "beta = " << fmt(c.beta) << "\n";
  os << "eps = " << fmt(c.eps) << "\n";
  os << "formulation = " << to_string(c.formulation) << "\n";
  os << "backend = " << to_string(c.backend) << "\n";
  os << "integrator = " << to_string(c.integrator) << "\n";
  os << "n = " << c.n << "\n";
  os << "length = " << fmt(c.length) << "\n";
  os << "t_end = " << fmt(c.t_end) << "\n";
  os << "dt_init = " << fmt(c.dt_init) << "\n";
  os << "dt_min = " << fmt(c.dt_min) << "\n";
  os << "dt_max = " << fmt(c.dt_max) << "\n";
  os << "safety = " << fmt(c.safety) << "\n";
  os << "cfl4 = " << fmt(c.cfl4) << "\n";
  os << "snapshot_every = " << c.snapshot_every << "\n";
  os << "preset = " << c.preset.to_string() << "\n";
  os << "seed = " << c.seed << "\n";
  if (!c.outdir.empty()) os << "outdir = " << c.outdir << "\n";
  if (c.delta_override) os << "delta_override = " << fmt(*c.delta_override)
                           << "\n";
  os << "vacuum_lift = " << fmt(c.vacuum_lift) << "\n";
  os << "track_sweep_stats = " << (c.track_sweep_stats ? "true" : "false")
     << "\n";
  return os.str();
}

Field initial_density(const RunConfig& cfg, GridPtr grid) {
  const double L = grid->length();
  switch (cfg.preset.kind) {
    case PresetKind::Constant:
      return Field::constant(grid, 1.0);
    case PresetKind::Qdd:
    case PresetKind::ThinFilm:
    case PresetKind::Cosine: {
      double a = cfg.preset.amplitude;
      int k = cfg.preset.wavenumber;
      Field f = Field::from_function(grid, [=](double x) {
        return 1.0 + a * std::cos(2.0 * M_PI * k * x / L);
      });
      if (f.min() <= 0.0) {
        // Theorem-style lift: strictly positive data required by the
        // discrete scheme; the lift is recorded in the metadata.
        double lift = cfg.vacuum_lift;
        f = f + lift;
        f = (1.0 / (integrate(f) / L)) * f;
      }
      return f;
    }
    case PresetKind::ExpSin: {
      double a = cfg.preset.amplitude;
      Field f = Field::from_function(grid, [=](double x) {
        return std::exp(a * std::sin(2.0 * M_PI * x / L));
      });
      return (1.0 / (integrate(f) / L)) * f;
    }
    case PresetKind::Bump: {
      double floor = cfg.preset.floor;
      double amp = (1.0 - floor) * 128.0 / 35.0;
      return Field::from_function(grid, [=](double x) {
        double c = 0.5 + 0.5 * std::cos(2.0 * M_PI * x / L);
        return floor + amp * c * c * c * c;
      });
    }
  }
  throw ConfigError("initial_density: unhandled preset");
}

}  // namespace gflow
