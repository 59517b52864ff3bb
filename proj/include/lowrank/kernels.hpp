#pragma once

#include <cstddef>
#include <vector>

#include "lowrank/dense_matrix.hpp"

// Self-contained dense linear-algebra primitives. Everything here is written
// for determinism first: fixed sweep orders, fixed tie-breaks, no dependence
// on threading or vendor kernels, so that repeated runs are bit-identical.
namespace lowrank {

// Eigenvalues sorted descending (exact ties keep their original diagonal
// order); eigenvectors are the matching columns.
struct EigenResult {
  std::vector<double> eigenvalues;
  DenseMatrix eigenvectors;
};

// Thin SVD: u is m x k, v is n x k, k = min(m, n), singular values descending.
struct SvdResult {
  std::vector<double> singular_values;
  DenseMatrix u;
  DenseMatrix v;
};

// Cyclic Jacobi eigensolver for symmetric matrices. The input must be
// symmetric to 1e-12 relative to its largest entry; sweeps stop once the
// off-diagonal Frobenius norm drops below 1e-13 times the Frobenius norm of
// the input.
EigenResult sym_eig(const DenseMatrix& c);

// One-sided Jacobi SVD (column rotations on the implicit Gram matrix).
// Convergence is per column pair: rotations continue until every pair
// satisfies |a_p . a_q| <= 1e-13 * ||a_p|| * ||a_q||, so even clusters of
// tiny singular values are resolved with relative accuracy. Columns whose
// norm has fallen 120 orders of magnitude below the largest one are treated
// as vanished and left alone (they are cancellation debris; rotating them
// never terminates on exactly rank-deficient input). Chosen over eig(A^T A)
// to avoid squaring the condition number.
SvdResult svd(const DenseMatrix& a);

// Forward substitution with an implicit unit diagonal. Only the strictly
// lower part of b is read.
std::vector<double> solve_unit_lower_triangular(const DenseMatrix& b,
                                                const std::vector<double>& rhs);

// Back substitution; diagonal entries must be nonzero.
std::vector<double> solve_upper_triangular(const DenseMatrix& u,
                                           const std::vector<double>& rhs);

// Spectral condition number sigma_max/sigma_min. Returns +inf when
// sigma_min < 1e-14 * sigma_max; a zero matrix is a contract violation.
double cond2(const DenseMatrix& a);

// Gaussian elimination with partial pivoting. Throws numeric_error when a
// pivot falls below 1e-14 times the largest input entry.
std::vector<double> lu_solve(DenseMatrix a, std::vector<double> rhs);

// Determinant via the same elimination; returns 0 for singular input rather
// than throwing (callers compare determinant magnitudes).
double lu_determinant(DenseMatrix a);

// Discrete scalar product weight * sum_i v_i w_i. The sum is accumulated
// first and scaled once, so callers relying on bitwise reproducibility get a
// single rounding for the weight.
double weighted_dot(const std::vector<double>& v, const std::vector<double>& w,
                    double weight);

// Index of the first entry attaining the maximal absolute value (the shared
// tie-break rule: lowest index wins).
std::size_t first_argmax_abs(const std::vector<double>& v);

// Entry of maximal absolute value with the shared two-level tie-break: pick
// the first column whose maximum strictly beats all earlier columns, then the
// first row attaining that maximum inside it. Cross elimination with global
// pivoting and max-norm greedy selection both rely on this exact scan.
struct GlobalArgmax {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;  // |a(row, col)|
};

GlobalArgmax global_first_argmax_abs(const DenseMatrix& a);

}  // namespace lowrank
