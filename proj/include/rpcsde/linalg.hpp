#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace rpcsde {

// Small dense helpers for the symmetric matrices appearing here (size <= ~100).
// Row-major storage, n x n.

// Lower Cholesky factor G with A = G G^T.  The pivot is the Schur-complement
// diagonal before the square root; a pivot below pivot_floor (or NaN) raises
// singular_hankel_error carrying its index and value.
std::vector<double> cholesky_lower(const std::vector<double>& a, std::size_t n, double pivot_floor);

std::vector<double> invert_lower_triangular(const std::vector<double>& g, std::size_t n);

// All eigenvalues of a symmetric matrix via cyclic Jacobi rotations (unsorted).
std::vector<double> symmetric_eigenvalues(std::vector<double> a, std::size_t n);

// Extreme eigenvalues of a symmetric matrix.
std::pair<double, double> symmetric_eigen_bounds(std::vector<double> a, std::size_t n);

}  // namespace rpcsde
