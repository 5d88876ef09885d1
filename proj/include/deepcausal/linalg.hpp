#pragma once

#include "deepcausal/common.hpp"

namespace deepcausal {

// Eigenpairs sorted by ascending eigenvalue. Column j of `vectors` pairs with
// values[j]; every column has its largest-magnitude entry positive.
// Equal eigenvalues (within 1e-12 relative) are ordered by comparing their
// eigenvectors entrywise: the first differing entry decides, larger first.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
  int sweeps = 0;
};

// Cyclic Jacobi rotations on a symmetric matrix until the off-diagonal
// Frobenius norm falls below tol * max(1, ||A||_F).
SymmetricEigen jacobi_eigen(const Matrix& a, double tol = 1e-10, int max_sweeps = 100);

// Eigen-decomposition of B^T B by one-sided Jacobi rotations on the columns
// of B, without forming B^T B. A pair of columns counts as converged when
// |b_p . b_q| <= tol * ||b_p|| ||b_q||.
SymmetricEigen gram_eigen_jacobi(Matrix b, double tol = 1e-12, int max_sweeps = 100);

// Sort eigenpairs and fix signs according to the SymmetricEigen contract.
void canonicalize_eigenpairs(SymmetricEigen& e);

// Largest-magnitude entry of each column made positive.
void normalize_column_signs(Matrix& m);

}  // namespace deepcausal
