#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "gflow/coefficients.hpp"

namespace gflow {

enum class Backend { Spectral, Fd4 };

class Field;

/// Uniform periodic grid on [0, L).  Immutable after construction; the
/// spectral backend owns its FFT plans, so grids are shared by pointer.
class Grid {
 public:
  /// n >= 16; the spectral backend additionally requires n to be a power
  /// of two.
  Grid(int n, double length, Backend backend);
  ~Grid();
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  int n() const { return n_; }
  double length() const { return length_; }
  double h() const { return h_; }
  Backend backend() const { return backend_; }
  double x(int i) const { return h_ * i; }

  /// Largest magnitude of the discrete fourth-derivative symbol times h^4
  /// (dimensionless stiffness constant of the backend).
  double fourth_symbol_constant() const;

 private:
  friend class Field;
  friend Field dx(const Field&);
  friend Field dxx(const Field&);
  friend Field symbol_solve(const Field&, double, double, double);

  void spectral_derivative(const double* in, double* out, int order) const;
  void spectral_symbol_solve(const double* in, double* out, double c0,
                             double c2, double c4) const;

  int n_;
  double length_;
  double h_;
  Backend backend_;
  void* plan_r2c_ = nullptr;  // fftw_plan, opaque here
  void* plan_c2r_ = nullptr;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(int n, double length, Backend backend) {
  return std::make_shared<const Grid>(n, length, backend);
}

/// Real-valued grid function.  Values are validated finite on construction.
class Field {
 public:
  Field(GridPtr grid, std::vector<double> values);

  static Field constant(GridPtr grid, double value);
  static Field from_function(GridPtr grid,
                             const std::function<double(double)>& f);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int size() const { return static_cast<int>(values_.size()); }
  std::span<const double> values() const { return values_; }
  double operator[](int i) const { return values_[i]; }
  double& operator[](int i) { return values_[i]; }

  double min() const;
  double max() const;
  double max_abs() const;

  /// Pointwise map; the result lives on the same grid.
  Field map(const std::function<double(double)>& f) const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Periodic first and second derivatives.  SPECTRAL differentiates exactly
/// on resolved modes (Nyquist zeroed, so dxx == dx(dx(.)) holds with the
/// same symbol); FD4 uses 4th-order centered stencils.
Field dx(const Field& f);
Field dxx(const Field& f);

/// h * sum of values (compensated summation); exact-mean quadrature on the
/// periodic grid.
double integrate(const Field& f);

/// Exact inverse of the constant-coefficient operator c0 + c2 (-dxx) +
/// c4 dxxxx on the spectral grid (division by c0 + c2 k^2 + c4 k^4 mode
/// by mode, Nyquist treated like the derivative ops).  Spectral only.
Field symbol_solve(const Field& rhs, double c0, double c2, double c4);

/// Pointwise power rho^p via a single positive-branch code path.  A value
/// that is nonpositive (or below floor) throws VacuumError carrying the
/// offending index.
Field power_field(const Field& f, double p, double floor = 1e-300);
Field log_field(const Field& f, double floor = 1e-300);

// Pointwise arithmetic.  Operands must share a grid.
Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(const Field& a, const Field& b);
Field operator*(double s, const Field& a);
Field operator+(const Field& a, double s);
Field operator-(const Field& a);

/// max_i |a_i - b_i| for fields on grids of equal size (grids may differ,
/// e.g. spectral vs fd4 oracles on matching points).
double max_abs_diff(const Field& a, const Field& b);

}  // namespace gflow
