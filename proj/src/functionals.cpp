#include "gflow/functionals.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace gflow {

namespace {

void check_positive(const Field& rho) {
  for (int i = 0; i < rho.size(); ++i) {
    if (!(rho[i] > 0.0)) {
      throw VacuumError("functional evaluated on vacuum state at index " +
                            std::to_string(i),
                        i, rho[i]);
    }
  }
}

void require_entropy_branch(const Params& p, const char* who) {
  if (p.excluded_flags[3]) {
    throw std::domain_error(std::string(who) +
                            ": beta = -1 selects the log branch");
  }
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string DiagRecord::csv_header() {
  return "t,mass,energy,entropy,f_entropy,entropy_dissip,energy_dissip,"
         "rho_min,rho_max,theta_h2,theta_grad4,weak_residual";
}

std::string DiagRecord::csv_row() const {
  std::string s;
  const double vals[] = {t,        mass,         energy,   entropy,
                         f_entropy, entropy_dissip, energy_dissip, rho_min,
                         rho_max,  theta_h2,     theta_grad4, weak_residual};
  for (int i = 0; i < 12; ++i) {
    if (i) s += ',';
    s += fmt17(vals[i]);
  }
  return s;
}

double mass(const Field& rho) {
  check_positive(rho);
  return integrate(rho);
}

double korteweg_energy(const Field& rho, const Params& p) {
  check_positive(rho);
  Field g = dx(rho);
  Field kap = rho.map([&](double r) { return kappa_eps(r, p); });
  return 0.5 * integrate(kap * g * g);
}

double entropy(const Field& rho, const Params& p) {
  check_positive(rho);
  require_entropy_branch(p, "entropy");
  double pref = 4.0 / ((p.beta + 3.0) * (p.beta + 1.0));
  return pref * integrate(power_field(rho, 0.5 * (p.beta + 3.0)));
}

double entropy_dissipation(const Field& rho, const Params& p) {
  check_positive(rho);
  require_entropy_branch(p, "entropy_dissipation");
  double pref = 4.0 / ((p.beta + 1.0) * (p.beta + 1.0));
  Field d2 = dxx(power_field(rho, 0.5 * (p.beta + 1.0)));
  return pref * integrate(power_field(rho, 0.5 * (p.beta + 3.0)) * d2 * d2);
}

double f_entropy(const Field& rho, const Params& p) {
  check_positive(rho);
  return integrate(rho.map([&](double r) { return f_eps(r, p); }));
}

std::pair<double, double> theta_norms(const Field& rho, const Params& p) {
  check_positive(rho);
  if (p.excluded_flags[1]) {
    throw std::domain_error("theta_norms: beta = -5/3 gives theta = 0");
  }
  Field d2 = dxx(power_field(rho, p.theta));
  Field g = dx(power_field(rho, 0.5 * p.theta));
  return {integrate(d2 * d2), integrate(g * g * g * g)};
}

double energy_halfpower(const Field& rho, const Params& p) {
  check_positive(rho);
  if (p.excluded_flags[0]) {
    throw std::domain_error("energy_halfpower: beta = -2 is the log branch");
  }
  Field g = dx(power_field(rho, 0.5 * (p.beta + 2.0)));
  return integrate(g * g);
}

double velocity_dissipation(const Field& rho, const Field& u, double delta) {
  Field gu = dx(u);
  return integrate(rho * u * u) + delta * integrate(gu * gu);
}

double vacuum_exponent(const Field& rho, const Params& p) {
  check_positive(rho);
  double m = 0.0;
  for (int i = 0; i < rho.size(); ++i) {
    m = std::max(m, std::abs(std::log(rho[i])));
  }
  return p.eps * m;
}

DiagRecord diagnostics(double t, const Field& rho, const Params& p,
                       const Field* u, double delta) {
  DiagRecord d;
  d.t = t;
  d.mass = mass(rho);
  d.energy = korteweg_energy(rho, p);
  d.rho_min = rho.min();
  d.rho_max = rho.max();
  if (!p.excluded_flags[3]) {
    d.entropy = entropy(rho, p);
    d.entropy_dissip = entropy_dissipation(rho, p);
    d.f_entropy = f_entropy(rho, p);
  }
  if (!p.excluded_flags[1]) {
    auto [h2, g4] = theta_norms(rho, p);
    d.theta_h2 = h2;
    d.theta_grad4 = g4;
  }
  if (u != nullptr) {
    d.energy_dissip = velocity_dissipation(rho, *u, delta);
  }
  return d;
}

WeakBank WeakBank::standard() {
  WeakBank bank;
  const double fracs[] = {1.0 / 3.0, 2.0 / 3.0, 1.0};
  for (int k = 0; k <= 4; ++k) {
    for (double a : fracs) {
      bank.members.push_back({k, 0.3 * k, a});
    }
  }
  return bank;
}

namespace {

// Bump eta(s) = (1 - s^2)^5 on [0, 1), zero beyond; C^4 at s = 1 and
// polynomial inside, so Gauss quadrature integrates it exactly against
// low-degree factors.
double eta(double s) {
  if (s >= 1.0) return 0.0;
  double w = 1.0 - s * s;
  return w * w * w * w * w;
}

double eta_prime(double s) {
  if (s >= 1.0) return 0.0;
  double w = 1.0 - s * s;
  return -10.0 * s * w * w * w * w;
}

// 6-point Gauss-Legendre on [0,1]; exact through degree 11, which covers
// (linear moment) x (degree-10 bump).
const double kGaussX[6] = {0.033765242898423986, 0.16939530676686776,
                           0.38069040695840155,  0.6193095930415985,
                           0.8306046932331322,   0.966234757101576};
const double kGaussW6[6] = {0.08566224618958517, 0.18038078652406930,
                            0.23395696728634552, 0.23395696728634552,
                            0.18038078652406930, 0.08566224618958517};

// Integrate (linear interpolant through (t0,a0),(t1,a1)) * w(t) over
// [t0, t1], where w(t) is eta or eta' of t/(cT) (chain factor applied for
// eta').
double gauss_moment(double t0, double t1, double a0, double a1, double cT,
                    bool deriv) {
  double len = t1 - t0;
  double acc = 0.0;
  for (int q = 0; q < 6; ++q) {
    double t = t0 + len * kGaussX[q];
    double a = a0 + (a1 - a0) * kGaussX[q];
    double s = t / cT;
    double w = deriv ? eta_prime(s) / cT : eta(s);
    acc += kGaussW6[q] * a * w;
  }
  return acc * len;
}

}  // namespace

double weak_residual(const std::vector<Snapshot>& traj, const Params& p,
                     const WeakBank& bank) {
  if (traj.size() < 3) {
    throw std::invalid_argument("weak_residual: need at least 3 snapshots");
  }
  if (p.excluded_flags[1]) {
    throw std::domain_error("weak_residual: beta = -5/3 excluded");
  }
  const Grid& g = traj.front().rho.grid();
  const double L = g.length();
  const double T = traj.back().t;
  if (!(T > 0.0)) {
    throw std::invalid_argument("weak_residual: trajectory spans no time");
  }
  const int m = static_cast<int>(traj.size());
  const double th = p.theta;
  const double pw = p.beta + 2.0 - th;  // = (beta+3)/4 > 0

  // Per-snapshot spatial moments against each harmonic, psi-independent:
  // the rho moment pairs with dpsi/dt, the combined second-order moment
  // (1/theta) rho^pw dxx(rho^theta) - (b+3)/theta^2 rho^pw |dx rho^{th/2}|^2
  // pairs with dxx(psi).
  const int kmax = 4;
  std::vector<std::vector<double>> mom_rho(m), mom_flux(m);
  for (int i = 0; i < m; ++i) {
    const Field& rho = traj[i].rho;
    Field rp = power_field(rho, pw);
    Field d2t = dxx(power_field(rho, th));
    Field gt = dx(power_field(rho, 0.5 * th));
    Field flux = (1.0 / th) * (rp * d2t) -
                 ((p.beta + 3.0) / (th * th)) * (rp * gt * gt);
    mom_rho[i].resize(2 * (kmax + 1));
    mom_flux[i].resize(2 * (kmax + 1));
    for (int k = 0; k <= kmax; ++k) {
      double sr_c = 0.0, sr_s = 0.0, sf_c = 0.0, sf_s = 0.0;
      for (int j = 0; j < g.n(); ++j) {
        double arg = 2.0 * M_PI * k * g.x(j) / L;
        double c = std::cos(arg), s = std::sin(arg);
        sr_c += rho[j] * c;
        sr_s += rho[j] * s;
        sf_c += flux[j] * c;
        sf_s += flux[j] * s;
      }
      mom_rho[i][2 * k] = sr_c * g.h();
      mom_rho[i][2 * k + 1] = sr_s * g.h();
      mom_flux[i][2 * k] = sf_c * g.h();
      mom_flux[i][2 * k + 1] = sf_s * g.h();
    }
  }

  double worst = 0.0;
  for (const WeakTestFunction& w : bank.members) {
    const double cT = w.support_frac * T;
    const double cph = std::cos(w.phase), sph = std::sin(w.phase);
    const double ksq = std::pow(2.0 * M_PI * w.k / L, 2);
    // cos(arg + phase) = cos(arg) cos(phase) - sin(arg) sin(phase)
    auto proj = [&](const std::vector<double>& mom) {
      return mom[2 * w.k] * cph - mom[2 * w.k + 1] * sph;
    };
    double time_term = 0.0, flux_term = 0.0;
    for (int i = 0; i + 1 < m; ++i) {
      double t0 = traj[i].t, t1 = traj[i + 1].t;
      time_term += gauss_moment(t0, t1, proj(mom_rho[i]), proj(mom_rho[i + 1]),
                                cT, true);
      flux_term += gauss_moment(t0, t1, proj(mom_flux[i]),
                                proj(mom_flux[i + 1]), cT, false);
    }
    double datum = proj(mom_rho[0]) * eta(0.0);
    double res = -time_term - ksq * flux_term - datum;
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

}  // namespace gflow
