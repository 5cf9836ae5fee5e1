#include <doctest.h>

#include <cmath>
#include <vector>

#include "gflow/coefficients.hpp"

using namespace gflow;

namespace {

// log-spaced rho grid 1e-6 .. 1e6 and the documented beta/eps sets
std::vector<double> rho_grid() {
  std::vector<double> out;
  for (int e = -12; e <= 12; ++e) out.push_back(std::pow(10.0, 0.5 * e));
  return out;
}

const std::vector<double> kBetas = {-2.5, -2.0, -1.5, -1.0, -0.5,
                                    0.0,  0.5,  1.0,  2.0};
const std::vector<double> kEps = {0.0, 0.1, 0.5};

}  // namespace

TEST_CASE("Params derived quantities and rejection") {
  Params p(1.0, 0.1);
  CHECK(p.alpha == doctest::Approx(1.5));
  CHECK(p.theta == doctest::Approx(2.0));
  CHECK(p.delta_eps == doctest::Approx(delta_schedule(0.1)));
  CHECK_FALSE(p.log_branch());

  CHECK(Params(-2.0).excluded_flags[0]);
  CHECK(Params(-5.0 / 3.0).excluded_flags[1]);
  CHECK(Params(-1.5).excluded_flags[2]);
  CHECK(Params(-1.0).excluded_flags[3]);
  CHECK(Params(-1.0).log_branch());

  CHECK_THROWS_AS(Params(-3.0), std::domain_error);
  CHECK_THROWS_AS(Params(-3.5), std::domain_error);
  CHECK_THROWS_AS(Params(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(Params(0.0, -0.1), std::domain_error);
}

TEST_CASE("kappa_eps closed-form values") {
  // rho = 1: every power is 1, so kappa = 1 + 2 eps + eps^2 = (1+eps)^2
  for (double beta : {-2.0, 0.0, 1.7}) {
    CHECK(kappa_eps(1.0, Params(beta, 0.1)) == doctest::Approx(1.21));
    // same value via the derivative relation: (mu'(1))^2 = (1 + eps)^2
    double mp = mu_eps_prime(1.0, Params(beta, 0.1));
    CHECK(mp * mp == doctest::Approx(1.21));
  }
  CHECK(kappa_eps(2.0, Params(0.0, 0.0)) == doctest::Approx(1.0));
  double expected = 2.0 + 2.0 * 0.5 * std::pow(2.0, -0.5) +
                    0.25 * std::pow(2.0, -2.0);
  CHECK(kappa_eps(2.0, Params(1.0, 0.5)) == doctest::Approx(expected));
  CHECK_THROWS_AS(kappa_eps(0.0, Params(0.0)), VacuumError);
  CHECK_THROWS_AS(kappa_eps(-1.0, Params(0.0)), VacuumError);
}

TEST_CASE("mu_eps and derivative values") {
  CHECK(mu_eps(1.0, Params(0.0, 0.0)) == doctest::Approx(2.0 / 3.0));
  CHECK(mu_eps_prime(1.0, Params(0.0, 0.0)) == doctest::Approx(1.0));
  // beta = -1: (beta+3)/2 = 1, mu = rho
  CHECK(mu_eps(4.0, Params(-1.0, 0.0)) == doctest::Approx(4.0));
  CHECK(mu_eps_prime(4.0, Params(-1.0, 0.0)) == doctest::Approx(1.0));
  CHECK(mu_eps_prime(2.0, Params(1.0, 0.2)) ==
        doctest::Approx(2.0 + 0.2 * std::pow(2.0, -0.5)));
}

TEST_CASE("mu_eps_prime is the derivative of mu_eps (central differences)") {
  for (double beta : {-2.5, -0.5, 1.0}) {
    for (double eps : kEps) {
      Params p(beta, eps);
      for (double rho : {0.3, 1.0, 2.0}) {
        double h = 1e-6 * rho;
        double fd = (mu_eps(rho + h, p) - mu_eps(rho - h, p)) / (2.0 * h);
        CHECK(mu_eps_prime(rho, p) ==
              doctest::Approx(fd).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("phi_eps values and log-branch rejection") {
  CHECK(phi_eps(1.0, Params(1.0, 0.0)) == doctest::Approx(1.0));
  CHECK(phi_eps_prime(1.0, Params(1.0, 0.0)) == doctest::Approx(1.0));
  CHECK(phi_eps(1.0, Params(0.0, 0.3)) == doctest::Approx(2.0 - 0.6));
  CHECK(phi_eps_prime(1.0, Params(0.0, 0.3)) == doctest::Approx(1.3));
  CHECK_THROWS_AS(phi_eps(1.0, Params(-1.0, 0.0)), std::domain_error);
  CHECK_THROWS_AS(phi_eps(0.0, Params(0.0)), VacuumError);
}

TEST_CASE("f_eps values and antiderivative relation") {
  CHECK(f_eps(1.0, Params(0.0, 0.0)) ==
        doctest::Approx(4.0 / 3.0 + 1.5));
  CHECK(f_eps(1.0, Params(1.0, 0.5)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(f_eps(1.0, Params(-1.0)), std::domain_error);

  // central-difference oracle at rho = 2, beta = 0, eps = 0.1
  Params p(0.0, 0.1);
  double h = 1e-5;
  double fd = (f_eps(2.0 + h, p) - f_eps(2.0 - h, p)) / (2.0 * h);
  CHECK(std::abs(fd - phi_eps(2.0, p)) < 1e-9);
}

TEST_CASE("F' = phi observed order >= 1.9 under h refinement") {
  Params p(0.5, 0.2);
  double rho = 1.7;
  auto err = [&](double h) {
    double fd = (f_eps(rho + h, p) - f_eps(rho - h, p)) / (2.0 * h);
    return std::abs(fd - phi_eps(rho, p));
  };
  double e1 = err(1e-3), e2 = err(5e-4);
  double order = std::log(e1 / e2) / std::log(2.0);
  CHECK(order >= 1.9);
}

TEST_CASE("coefficient algebra on the documented grid") {
  for (double beta : kBetas) {
    for (double eps : kEps) {
      Params p(beta, eps);
      for (double rho : rho_grid()) {
        double mp = mu_eps_prime(rho, p);
        CHECK(kappa_eps(rho, p) * rho ==
              doctest::Approx(mp * mp).epsilon(1e-12));
        CHECK(rho * phi_eps_prime(rho, p) ==
              doctest::Approx(mp).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("kappa_eps_prime differentiates kappa_eps") {
  for (double beta : {-2.5, -1.0, 0.5, 2.0}) {
    for (double eps : kEps) {
      Params p(beta, eps);
      for (double rho : {0.4, 1.3, 3.0}) {
        double h = 1e-6 * rho;
        double fd =
            (kappa_eps(rho + h, p) - kappa_eps(rho - h, p)) / (2.0 * h);
        CHECK(kappa_eps_prime(rho, p) ==
              doctest::Approx(fd).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("power-case growth bound holds with equality at eps = 0") {
  for (double beta : {-2.5, -0.5, 0.0, 1.0, 2.0}) {
    Params p(beta, 0.0);
    double c = power_growth_constant(p);
    CHECK(c == doctest::Approx(std::abs(beta + 1.0) / 2.0));
    for (double rho : rho_grid()) {
      double lhs = rho * std::abs(mu_eps_second(rho, p));
      double rhs = c * mu_eps_prime(rho, p);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
    }
  }
  // eps > 0: inequality with the max of the two branch constants
  for (double beta : {-2.5, 0.0, 2.0}) {
    Params p(beta, 0.3);
    double c = power_growth_constant(p);
    for (double rho : rho_grid()) {
      CHECK(rho * std::abs(mu_eps_second(rho, p)) <=
            c * mu_eps_prime(rho, p) * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("delta_schedule values, monotonicity, and decay") {
  CHECK(delta_schedule(0.0) == 0.0);
  CHECK(delta_schedule(1.0) == doctest::Approx(std::exp(-0.5)));
  CHECK(delta_schedule(0.5) ==
        doctest::Approx(std::pow(0.5, 6) * std::exp(-2.0)));
  CHECK_THROWS_AS(delta_schedule(-0.1), std::domain_error);

  // monotone increasing on (0, 1]; below eps ~ 0.027 the exponential
  // underflows to an exact 0, which is the continuous limit value
  double prev = 0.0;
  for (int i = 3; i <= 100; ++i) {
    double eps = i / 100.0;
    double d = delta_schedule(eps);
    CHECK(d > prev);
    prev = d;
  }
  // delta/eps^k -> 0 as eps -> 0 for every k <= 6
  double r_prev = 1.0;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    double r = delta_schedule(eps) / std::pow(eps, 6);
    CHECK(r <= r_prev);
    CHECK(r < 1e-20);
    r_prev = r;
  }
}
