#include "gflow/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>
#include <string>

namespace gflow {

namespace {

// FFTW plan creation/destruction is not thread-safe; execution on distinct
// arrays is.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void check_same_grid(const Field& a, const Field& b) {
  if (&a.grid() != &b.grid()) {
    throw std::logic_error("Field operands live on different grids");
  }
}

}  // namespace

Grid::Grid(int n, double length, Backend backend)
    : n_(n), length_(length), h_(length / n), backend_(backend) {
  if (n < 16) {
    throw std::invalid_argument("Grid: n must be at least 16, got " +
                                std::to_string(n));
  }
  if (!(length > 0.0)) {
    throw std::invalid_argument("Grid: length must be positive");
  }
  if (backend_ == Backend::Spectral) {
    if (!is_power_of_two(n)) {
      throw std::invalid_argument(
          "Grid: spectral backend requires a power-of-two n, got " +
          std::to_string(n));
    }
    std::lock_guard<std::mutex> lock(fftw_mutex());
    std::vector<double> re(n_);
    std::vector<fftw_complex> cf(n_ / 2 + 1);
    // FFTW_UNALIGNED lets the plans run on any caller buffers later.
    plan_r2c_ = fftw_plan_dft_r2c_1d(n_, re.data(), cf.data(),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    plan_c2r_ = fftw_plan_dft_c2r_1d(n_, cf.data(), re.data(),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan_r2c_ == nullptr || plan_c2r_ == nullptr) {
      throw std::runtime_error("Grid: FFTW plan creation failed");
    }
  }
}

Grid::~Grid() {
  if (backend_ == Backend::Spectral) {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_r2c_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_c2r_));
  }
}

double Grid::fourth_symbol_constant() const {
  if (backend_ == Backend::Spectral) {
    // largest resolved wavenumber (Nyquist zeroed): k = n/2 - 1
    double khat = 2.0 * M_PI * (n_ / 2 - 1) / length_;
    return khat * khat * khat * khat * h_ * h_ * h_ * h_;
  }
  // FD4 dxx symbol peaks at 16/(3 h^2); applied twice.
  return (16.0 / 3.0) * (16.0 / 3.0);
}

void Grid::spectral_derivative(const double* in, double* out,
                               int order) const {
  const int nc = n_ / 2 + 1;
  std::vector<std::complex<double>> spec(nc);
  std::vector<double> tmp(in, in + n_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_r2c_), tmp.data(),
                       reinterpret_cast<fftw_complex*>(spec.data()));
  const double base = 2.0 * M_PI / length_;
  for (int k = 0; k < nc; ++k) {
    if (k >= n_ / 2) {
      spec[k] = 0.0;  // Nyquist: zeroed so dxx matches dx(dx(.)) exactly
      continue;
    }
    double kh = base * k;
    if (order == 1) {
      spec[k] *= std::complex<double>(0.0, kh);
    } else {
      spec[k] *= -kh * kh;
    }
  }
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_c2r_),
                       reinterpret_cast<fftw_complex*>(spec.data()), out);
  const double scale = 1.0 / n_;
  for (int i = 0; i < n_; ++i) out[i] *= scale;
}

void Grid::spectral_symbol_solve(const double* in, double* out, double c0,
                                 double c2, double c4) const {
  const int nc = n_ / 2 + 1;
  std::vector<std::complex<double>> spec(nc);
  std::vector<double> tmp(in, in + n_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_r2c_), tmp.data(),
                       reinterpret_cast<fftw_complex*>(spec.data()));
  const double base = 2.0 * M_PI / length_;
  for (int k = 0; k < nc; ++k) {
    double kh = (k >= n_ / 2) ? 0.0 : base * k;
    double k2 = kh * kh;
    spec[k] /= (c0 + c2 * k2 + c4 * k2 * k2);
  }
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_c2r_),
                       reinterpret_cast<fftw_complex*>(spec.data()), out);
  const double scale = 1.0 / n_;
  for (int i = 0; i < n_; ++i) out[i] *= scale;
}

Field symbol_solve(const Field& rhs, double c0, double c2, double c4) {
  const Grid& g = rhs.grid();
  if (g.backend() != Backend::Spectral) {
    throw std::logic_error("symbol_solve: spectral backend required");
  }
  std::vector<double> out(g.n());
  g.spectral_symbol_solve(rhs.values().data(), out.data(), c0, c2, c4);
  return Field(rhs.grid_ptr(), std::move(out));
}

Field::Field(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != grid_->n()) {
    throw std::invalid_argument("Field: value count does not match grid");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw std::domain_error("Field: non-finite value");
    }
  }
}

Field Field::constant(GridPtr grid, double value) {
  std::vector<double> v(grid->n(), value);
  return Field(std::move(grid), std::move(v));
}

Field Field::from_function(GridPtr grid,
                           const std::function<double(double)>& f) {
  std::vector<double> v(grid->n());
  for (int i = 0; i < grid->n(); ++i) v[i] = f(grid->x(i));
  return Field(std::move(grid), std::move(v));
}

double Field::min() const {
  return *std::min_element(values_.begin(), values_.end());
}

double Field::max() const {
  return *std::max_element(values_.begin(), values_.end());
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

Field Field::map(const std::function<double(double)>& f) const {
  std::vector<double> v(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) v[i] = f(values_[i]);
  return Field(grid_, std::move(v));
}

Field dx(const Field& f) {
  const Grid& g = f.grid();
  std::vector<double> out(g.n());
  if (g.backend() == Backend::Spectral) {
    g.spectral_derivative(f.values().data(), out.data(), 1);
  } else {
    const int n = g.n();
    const double c = 1.0 / (12.0 * g.h());
    auto v = f.values();
    for (int i = 0; i < n; ++i) {
      int ip1 = (i + 1) % n, ip2 = (i + 2) % n;
      int im1 = (i + n - 1) % n, im2 = (i + n - 2) % n;
      out[i] = c * (-v[ip2] + 8.0 * v[ip1] - 8.0 * v[im1] + v[im2]);
    }
  }
  return Field(f.grid_ptr(), std::move(out));
}

Field dxx(const Field& f) {
  const Grid& g = f.grid();
  std::vector<double> out(g.n());
  if (g.backend() == Backend::Spectral) {
    g.spectral_derivative(f.values().data(), out.data(), 2);
  } else {
    const int n = g.n();
    const double c = 1.0 / (12.0 * g.h() * g.h());
    auto v = f.values();
    for (int i = 0; i < n; ++i) {
      int ip1 = (i + 1) % n, ip2 = (i + 2) % n;
      int im1 = (i + n - 1) % n, im2 = (i + n - 2) % n;
      out[i] = c * (-v[ip2] + 16.0 * v[ip1] - 30.0 * v[i] + 16.0 * v[im1] -
                    v[im2]);
    }
  }
  return Field(f.grid_ptr(), std::move(out));
}

double integrate(const Field& f) {
  // Kahan summation keeps the quadrature independent of n at ~2 ulp.
  double s = 0.0, c = 0.0;
  for (double v : f.values()) {
    double y = v - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s * f.grid().h();
}

Field power_field(const Field& f, double p, double floor) {
  std::vector<double> out(f.size());
  for (int i = 0; i < f.size(); ++i) {
    double v = f[i];
    if (!(v > 0.0) || v < floor) {
      throw VacuumError("power_field: nonpositive value at index " +
                            std::to_string(i),
                        i, v);
    }
    out[i] = std::pow(v, p);
  }
  return Field(f.grid_ptr(), std::move(out));
}

Field log_field(const Field& f, double floor) {
  std::vector<double> out(f.size());
  for (int i = 0; i < f.size(); ++i) {
    double v = f[i];
    if (!(v > 0.0) || v < floor) {
      throw VacuumError("log_field: nonpositive value at index " +
                            std::to_string(i),
                        i, v);
    }
    out[i] = std::log(v);
  }
  return Field(f.grid_ptr(), std::move(out));
}

Field operator+(const Field& a, const Field& b) {
  check_same_grid(a, b);
  std::vector<double> out(a.size());
  for (int i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return Field(a.grid_ptr(), std::move(out));
}

Field operator-(const Field& a, const Field& b) {
  check_same_grid(a, b);
  std::vector<double> out(a.size());
  for (int i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return Field(a.grid_ptr(), std::move(out));
}

Field operator*(const Field& a, const Field& b) {
  check_same_grid(a, b);
  std::vector<double> out(a.size());
  for (int i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return Field(a.grid_ptr(), std::move(out));
}

Field operator*(double s, const Field& a) {
  std::vector<double> out(a.size());
  for (int i = 0; i < a.size(); ++i) out[i] = s * a[i];
  return Field(a.grid_ptr(), std::move(out));
}

Field operator+(const Field& a, double s) {
  std::vector<double> out(a.size());
  for (int i = 0; i < a.size(); ++i) out[i] = a[i] + s;
  return Field(a.grid_ptr(), std::move(out));
}

Field operator-(const Field& a) { return -1.0 * a; }

double max_abs_diff(const Field& a, const Field& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("max_abs_diff: size mismatch");
  }
  double m = 0.0;
  for (int i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace gflow
