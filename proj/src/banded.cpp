#include "gflow/banded.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace gflow {

namespace {

// Dense LU with partial pivoting for the (2p x 2p) Woodbury block.
void dense_lu(std::vector<std::vector<double>>& a, std::vector<int>& piv) {
  const int m = static_cast<int>(a.size());
  piv.resize(m);
  for (int k = 0; k < m; ++k) {
    int best = k;
    for (int i = k + 1; i < m; ++i) {
      if (std::abs(a[i][k]) > std::abs(a[best][k])) best = i;
    }
    piv[k] = best;
    if (best != k) std::swap(a[k], a[best]);
    if (a[k][k] == 0.0 || !std::isfinite(a[k][k])) {
      throw std::runtime_error("CyclicBanded: singular Woodbury block");
    }
    for (int i = k + 1; i < m; ++i) {
      a[i][k] /= a[k][k];
      for (int j = k + 1; j < m; ++j) a[i][j] -= a[i][k] * a[k][j];
    }
  }
}

std::vector<double> dense_solve(const std::vector<std::vector<double>>& lu,
                                const std::vector<int>& piv,
                                std::vector<double> b) {
  const int m = static_cast<int>(lu.size());
  for (int k = 0; k < m; ++k) {
    if (piv[k] != k) std::swap(b[k], b[piv[k]]);
    for (int i = k + 1; i < m; ++i) b[i] -= lu[i][k] * b[k];
  }
  for (int i = m - 1; i >= 0; --i) {
    for (int j = i + 1; j < m; ++j) b[i] -= lu[i][j] * b[j];
    b[i] /= lu[i][i];
  }
  return b;
}

}  // namespace

CyclicBanded::CyclicBanded(int n, int p,
                           std::vector<std::vector<double>> rows)
    : n_(n), p_(p), rows_(std::move(rows)) {
  if (p < 1 || n < 2 * p + 2) {
    throw std::invalid_argument(
        "CyclicBanded: need n >= 2p+2, got n=" + std::to_string(n) +
        " p=" + std::to_string(p));
  }
  if (static_cast<int>(rows_.size()) != n_) {
    throw std::invalid_argument("CyclicBanded: wrong row count");
  }
  for (const auto& r : rows_) {
    if (static_cast<int>(r.size()) != 2 * p_ + 1) {
      throw std::invalid_argument("CyclicBanded: wrong row width");
    }
  }
  factor();
}

void CyclicBanded::factor() {
  // Core B: the band with wrap-around entries dropped.
  lu_ = rows_;
  for (int i = 0; i < n_; ++i) {
    for (int d = -p_; d <= p_; ++d) {
      int j = i + d;
      if (j < 0 || j >= n_) lu_[i][p_ + d] = 0.0;
    }
  }
  for (int k = 0; k < n_; ++k) {
    double piv = lu_[k][p_];
    if (piv == 0.0 || !std::isfinite(piv)) {
      throw std::runtime_error("CyclicBanded: zero pivot at row " +
                               std::to_string(k));
    }
    int iend = std::min(k + p_, n_ - 1);
    for (int i = k + 1; i <= iend; ++i) {
      double l = lu_[i][p_ + (k - i)] / piv;
      lu_[i][p_ + (k - i)] = l;
      if (l == 0.0) continue;
      for (int j = k + 1; j <= iend; ++j) {
        lu_[i][p_ + (j - i)] -= l * lu_[k][p_ + (j - k)];
      }
    }
  }

  // Woodbury data: A = B + sum over wrap rows i of e_i w_i^T, where w_i
  // holds row i's wrapped entries in the opposite corner columns.
  std::vector<int> wrap_rows;
  for (int i = 0; i < p_; ++i) wrap_rows.push_back(i);
  for (int i = n_ - p_; i < n_; ++i) wrap_rows.push_back(i);
  const int r2 = 2 * p_;

  wraps_cols_.assign(r2, {});
  wraps_vals_.assign(r2, {});
  for (int r = 0; r < r2; ++r) {
    int i = wrap_rows[r];
    for (int d = -p_; d <= p_; ++d) {
      int j = i + d;
      if (j >= 0 && j < n_) continue;
      int col = (j + n_) % n_;
      double v = rows_[i][p_ + d];
      if (v != 0.0) {
        wraps_cols_[r].push_back(col);
        wraps_vals_[r].push_back(v);
      }
    }
  }

  z_.assign(r2, {});
  for (int c = 0; c < r2; ++c) {
    std::vector<double> e(n_, 0.0);
    e[wrap_rows[c]] = 1.0;
    z_[c] = core_solve(e);
  }

  small_lu_.assign(r2, std::vector<double>(r2, 0.0));
  for (int r = 0; r < r2; ++r) {
    for (int c = 0; c < r2; ++c) {
      double acc = (r == c) ? 1.0 : 0.0;
      for (std::size_t t = 0; t < wraps_cols_[r].size(); ++t) {
        acc += wraps_vals_[r][t] * z_[c][wraps_cols_[r][t]];
      }
      small_lu_[r][c] = acc;
    }
  }
  dense_lu(small_lu_, small_piv_);
}

std::vector<double> CyclicBanded::core_solve(
    const std::vector<double>& b) const {
  std::vector<double> y(b);
  for (int i = 0; i < n_; ++i) {
    int dlo = std::max(-p_, -i);
    for (int d = dlo; d < 0; ++d) y[i] -= lu_[i][p_ + d] * y[i + d];
  }
  for (int i = n_ - 1; i >= 0; --i) {
    int dhi = std::min(p_, n_ - 1 - i);
    for (int d = 1; d <= dhi; ++d) y[i] -= lu_[i][p_ + d] * y[i + d];
    y[i] /= lu_[i][p_];
  }
  return y;
}

std::vector<double> CyclicBanded::solve(const std::vector<double>& b) const {
  if (static_cast<int>(b.size()) != n_) {
    throw std::invalid_argument("CyclicBanded::solve: size mismatch");
  }
  std::vector<double> y = core_solve(b);
  const int r2 = 2 * p_;
  std::vector<double> rhs(r2, 0.0);
  for (int r = 0; r < r2; ++r) {
    double acc = 0.0;
    for (std::size_t t = 0; t < wraps_cols_[r].size(); ++t) {
      acc += wraps_vals_[r][t] * y[wraps_cols_[r][t]];
    }
    rhs[r] = acc;
  }
  std::vector<double> s = dense_solve(small_lu_, small_piv_, rhs);
  for (int c = 0; c < r2; ++c) {
    if (s[c] == 0.0) continue;
    for (int i = 0; i < n_; ++i) y[i] -= s[c] * z_[c][i];
  }
  return y;
}

}  // namespace gflow
