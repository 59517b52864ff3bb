#pragma once

#include <cstddef>
#include <vector>

#include "lowrank/dense_matrix.hpp"
#include "lowrank/sampling.hpp"

namespace lowrank {

// Orthonormal basis (in the weighted discrete scalar product) extracted from
// the eigendecomposition of the snapshot correlation matrix, together with
// the full clamped spectrum.
struct PodBasis {
  std::vector<double> eigenvalues;            // all of them, descending, >= 0
  std::vector<std::vector<double>> basis;     // q() vectors over grid_x
  double weight = 1.0;

  std::size_t q() const { return basis.size(); }
};

// Truncation request: either a fixed rank or an energy tolerance on
// sqrt(sum of trailing eigenvalues).
struct PodTruncation {
  static PodTruncation rank(std::size_t q) { return {true, q, 0.0}; }
  static PodTruncation energy(double tol) { return {false, 0, tol}; }

  bool by_rank = true;
  std::size_t q = 0;
  double tol = 0.0;
};

// C_ij = (1/n) (f_{y_j}, f_{y_i}) with the weighted scalar product over the
// x grid; symmetric by construction.
DenseMatrix correlation_matrix(const SnapshotMatrix& s);

// Correlation eigenpairs computed through the SVD of the scaled snapshot
// matrix (eigenvalue_q = sigma_q^2, eigenvector columns = right singular
// vectors), which keeps small modes accurate. Only modes with
// sigma_q > 1e-9 * sigma_1 count toward the numerical rank, so a requested
// rank beyond it is capped; eigenvalues are nonnegative by construction.
PodBasis pod_basis(const SnapshotMatrix& s, const PodTruncation& trunc);

struct PodProjection {
  std::vector<double> coefficients;
  std::vector<double> values;
};

// Orthogonal projection of a single snapshot onto the basis span.
PodProjection pod_project(const PodBasis& basis, const std::vector<double>& f);

// Root-mean-square projection error over all snapshot columns,
// sqrt((1/n) sum_y ||f_y - P f_y||^2).
double pod_error(const SnapshotMatrix& s, const PodBasis& basis);

// The matrix A with A^T A equal to the correlation matrix:
// A_ij = sqrt(weight/n) f(x_i, y_j). Its singular values are the square
// roots of the correlation eigenvalues.
DenseMatrix scaled_snapshot_matrix(const SnapshotMatrix& s);

}  // namespace lowrank
