#include "lowrank/pod.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "lowrank/errors.hpp"
#include "lowrank/kernels.hpp"

namespace lowrank {

namespace {

// A mode still carries numerical rank while its singular value stays above
// this fraction of the leading one.  Working on singular values instead of
// correlation eigenvalues keeps genuinely resolvable modes (sigma down to
// ~1e-9 relative) that the squared spectrum would bury in round-off.
constexpr double kSigmaRankRel = 1e-9;

}  // namespace

DenseMatrix correlation_matrix(const SnapshotMatrix& s) {
  const std::size_t n = s.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<std::vector<double>> columns(n);
  for (std::size_t j = 0; j < n; ++j) columns[j] = s.values.column(j);

  DenseMatrix c(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double entry = inv_n * weighted_dot(columns[j], columns[i], s.weight);
      c(i, j) = entry;
      c(j, i) = entry;
    }
  }
  return c;
}

PodBasis pod_basis(const SnapshotMatrix& s, const PodTruncation& trunc) {
  const std::size_t m = s.rows();
  const std::size_t n = s.cols();
  if (trunc.by_rank && trunc.q > n) {
    throw contract_error("pod_basis: requested rank " + std::to_string(trunc.q) +
                         " exceeds the number of snapshots " + std::to_string(n));
  }
  if (!trunc.by_rank && !(trunc.tol >= 0.0)) {
    throw contract_error("pod_basis: energy tolerance must be non-negative");
  }

  // The correlation eigenpairs are recovered through the singular value
  // decomposition of the scaled snapshot matrix: its right singular vectors
  // are the correlation eigenvectors and sigma_q^2 the eigenvalues, but the
  // small modes come out with far better relative accuracy than an
  // eigendecomposition of the explicitly squared matrix could deliver.
  const SvdResult sv = svd(scaled_snapshot_matrix(s));
  const std::size_t k = sv.singular_values.size();

  std::vector<double> eigenvalues(n, 0.0);
  for (std::size_t p = 0; p < k; ++p) {
    eigenvalues[p] = sv.singular_values[p] * sv.singular_values[p];
  }

  // Modes are usable only while the singular value stays meaningfully above
  // the round-off floor of the factorization.
  const double sigma_floor =
      kSigmaRankRel * (k > 0 ? sv.singular_values[0] : 0.0);
  std::size_t numerical_rank = 0;
  while (numerical_rank < k && sv.singular_values[numerical_rank] > sigma_floor) {
    ++numerical_rank;
  }

  std::size_t q = 0;
  if (trunc.by_rank) {
    q = std::min(trunc.q, numerical_rank);
  } else {
    // Smallest q with sqrt(sum_{p > q} lambda_p) <= tol.
    std::vector<double> tail(n + 1, 0.0);
    for (std::size_t p = n; p-- > 0;) tail[p] = tail[p + 1] + eigenvalues[p];
    q = numerical_rank;
    for (std::size_t candidate = 0; candidate <= numerical_rank; ++candidate) {
      if (std::sqrt(tail[candidate]) <= trunc.tol) {
        q = candidate;
        break;
      }
    }
  }

  PodBasis result;
  result.eigenvalues = std::move(eigenvalues);
  result.weight = s.weight;
  result.basis.reserve(q);
  for (std::size_t mode = 0; mode < q; ++mode) {
    std::vector<double> h(m, 0.0);
    for (std::size_t col = 0; col < n; ++col) {
      const double coeff = sv.v(col, mode);
      for (std::size_t i = 0; i < m; ++i) h[i] += coeff * s.values(i, col);
    }
    // In exact arithmetic h is already orthogonal to earlier modes; this
    // Gram-Schmidt sweep only strips the round-off contamination that builds
    // up for eigenvalues close to the clamp level.
    for (const std::vector<double>& prev : result.basis) {
      const double proj = weighted_dot(h, prev, s.weight);
      for (std::size_t i = 0; i < m; ++i) h[i] -= proj * prev[i];
    }
    const double norm = std::sqrt(weighted_dot(h, h, s.weight));
    if (!(norm > 0.0)) {
      throw numeric_error("pod_basis: mode " + std::to_string(mode) +
                          " collapsed to zero norm");
    }
    for (double& v : h) v /= norm;
    result.basis.push_back(std::move(h));
  }
  return result;
}

PodProjection pod_project(const PodBasis& basis, const std::vector<double>& f) {
  if (!basis.basis.empty() && basis.basis[0].size() != f.size()) {
    throw contract_error("pod_project: vector length does not match the basis grid");
  }
  PodProjection out;
  out.coefficients.reserve(basis.q());
  out.values.assign(f.size(), 0.0);
  for (const std::vector<double>& h : basis.basis) {
    const double coeff =
        weighted_dot(f, h, basis.weight) / weighted_dot(h, h, basis.weight);
    out.coefficients.push_back(coeff);
    for (std::size_t i = 0; i < f.size(); ++i) out.values[i] += coeff * h[i];
  }
  return out;
}

double pod_error(const SnapshotMatrix& s, const PodBasis& basis) {
  const std::size_t n = s.cols();
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::vector<double> column = s.values.column(j);
    const PodProjection proj = pod_project(basis, column);
    std::vector<double> residual(column.size());
    for (std::size_t i = 0; i < column.size(); ++i) residual[i] = column[i] - proj.values[i];
    sum += weighted_dot(residual, residual, s.weight);
  }
  return std::sqrt(sum / static_cast<double>(n));
}

DenseMatrix scaled_snapshot_matrix(const SnapshotMatrix& s) {
  const double factor = std::sqrt(s.weight / static_cast<double>(s.cols()));
  DenseMatrix a(s.rows(), s.cols(), 0.0);
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = 0; j < s.cols(); ++j) a(i, j) = factor * s.values(i, j);
  return a;
}

}  // namespace lowrank
