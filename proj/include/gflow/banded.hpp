#pragma once

#include <vector>

namespace gflow {

/// Periodic banded linear system with half-bandwidth p: row i holds the
/// 2p+1 coefficients of columns (i-p .. i+p) mod n.  Solved by splitting
/// off the 2p wrap-around corner columns and correcting the banded core
/// solve with the Woodbury identity (rank 2p).
///
/// No pivoting in the core LU; intended for the diagonally dominant
/// operators assembled here (identity/mass plus small elliptic terms).
class CyclicBanded {
 public:
  /// rows[i][p + d] is the coefficient of column (i + d) mod n, d in [-p, p].
  CyclicBanded(int n, int p, std::vector<std::vector<double>> rows);

  /// Factor once, then solve for any number of right-hand sides.
  std::vector<double> solve(const std::vector<double>& b) const;

  int n() const { return n_; }
  int bandwidth() const { return p_; }

 private:
  void factor();
  std::vector<double> core_solve(const std::vector<double>& b) const;

  int n_;
  int p_;
  std::vector<std::vector<double>> rows_;
  // banded LU factors of the core (wrap entries removed)
  std::vector<std::vector<double>> lu_;
  // wrapped corner entries per wrap row (sparse)
  std::vector<std::vector<int>> wraps_cols_;
  std::vector<std::vector<double>> wraps_vals_;
  // Woodbury correction: Z = B^{-1} U (n x 2p), and the small LU of
  // (I + V^T Z) with its pivots
  std::vector<std::vector<double>> z_;
  std::vector<std::vector<double>> small_lu_;
  std::vector<int> small_piv_;
};

}  // namespace gflow
