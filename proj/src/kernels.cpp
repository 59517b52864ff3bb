#include "lowrank/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lowrank {

namespace {

constexpr double kJacobiRelTol = 1e-13;   // off-diagonal decay target
constexpr double kSymmetryRelTol = 1e-12; // accepted input asymmetry
constexpr double kSingularRel = 1e-14;    // pivot / sigma_min cutoff
constexpr int kMaxSweeps = 60;
// Squared norm ratio below which a column counts as numerically vanished
// during the one-sided Jacobi sweeps (norm ratio 1e-120: far below any
// representable singular-value gap, far above the ~1e-154 ratio where the
// rotation angle would underflow and sweeps would stall).
constexpr double kVanishedColRel2 = 1e-240;

double off_diagonal_norm(const DenseMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) s += a(i, j) * a(i, j);
  return std::sqrt(2.0 * s);
}

// Stable sort of 0..n-1 by key descending; equal keys keep index order.
std::vector<std::size_t> descending_order(const std::vector<double>& key) {
  std::vector<std::size_t> idx(key.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
  return idx;
}

}  // namespace

EigenResult sym_eig(const DenseMatrix& c) {
  if (c.rows() != c.cols()) throw contract_error("sym_eig: matrix must be square");
  const std::size_t n = c.rows();
  if (n == 0) throw contract_error("sym_eig: empty matrix");

  const double scale = c.max_abs();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(c(i, j) - c(j, i)) > kSymmetryRelTol * std::max(scale, 1e-300))
        throw contract_error("sym_eig: matrix is not symmetric");

  // Work on the symmetrized copy so tiny accepted asymmetry cannot bias the
  // rotation order.
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (c(i, j) + c(j, i));

  DenseMatrix v = DenseMatrix::identity(n);
  const double target = kJacobiRelTol * a.frobenius_norm();

  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= target) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;
        const double tau = sn / (1.0 + cs);

        const double app = a(p, p), aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = a(p, k) = akp - sn * (akq + tau * akp);
          a(k, q) = a(q, k) = akq + sn * (akp - tau * akq);
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = cs * vkp - sn * vkq;
          v(k, q) = sn * vkp + cs * vkq;
        }
      }
    }
  }
  if (sweep == kMaxSweeps && off_diagonal_norm(a) > target)
    throw numeric_error("sym_eig: Jacobi sweeps did not converge");

  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
  const auto order = descending_order(diag);

  EigenResult out;
  out.eigenvalues.resize(n);
  out.eigenvectors = DenseMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = diag[order[k]];
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
  }
  return out;
}

SvdResult svd(const DenseMatrix& a0) {
  if (a0.rows() == 0 || a0.cols() == 0) throw contract_error("svd: empty matrix");

  const bool transposed = a0.rows() < a0.cols();
  DenseMatrix b = transposed ? a0.transposed() : a0;
  const std::size_t m = b.rows(), n = b.cols();
  DenseMatrix v = DenseMatrix::identity(n);

  auto col_dot = [&](std::size_t p, std::size_t q) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += b(i, p) * b(i, q);
    return s;
  };

  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    // Convergence is judged pair by pair relative to the two column norms.
    // A global criterion would go blind on clusters of tiny columns whose
    // mutual Gram entries are far below the leading ones even when the
    // columns are still strongly correlated.
    bool rotated = false;
    double max_norm2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) max_norm2 = std::max(max_norm2, col_dot(j, j));
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = col_dot(p, p);
        const double beta = col_dot(q, q);
        const double gamma = col_dot(p, q);
        if (gamma == 0.0) continue;
        // A column this far below the leading one is cancellation debris, not
        // signal: rotating against it only launders rounding noise, and for
        // exactly parallel columns such rotations would recur forever (each
        // one shrinks the small column by one epsilon while leaving the pair
        // parallel). Skipping here also caps |zeta| at ~1e133, so the rotation
        // formula below cannot overflow.
        if (alpha <= kVanishedColRel2 * max_norm2 ||
            beta <= kVanishedColRel2 * max_norm2)
          continue;
        if (std::abs(gamma) <= kJacobiRelTol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        double t = 1.0 / (std::abs(zeta) + std::sqrt(zeta * zeta + 1.0));
        if (zeta < 0.0) t = -t;
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = cs * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double bip = b(i, p), biq = b(i, q);
          b(i, p) = cs * bip - sn * biq;
          b(i, q) = sn * bip + cs * biq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = cs * vip - sn * viq;
          v(i, q) = sn * vip + cs * viq;
        }
      }
    }
    if (!rotated) break;
  }
  if (sweep == kMaxSweeps) throw numeric_error("svd: Jacobi sweeps did not converge");

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += b(i, j) * b(i, j);
    sigma[j] = std::sqrt(s);
  }
  const auto order = descending_order(sigma);

  DenseMatrix u_sorted(m, n), v_sorted(n, n);
  std::vector<double> s_sorted(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    s_sorted[k] = sigma[j];
    for (std::size_t i = 0; i < n; ++i) v_sorted(i, k) = v(i, j);
    if (sigma[j] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) u_sorted(i, k) = b(i, j) / sigma[j];
    }
  }
  // Orthonormal completion for exactly-zero singular values: Gram-Schmidt of
  // canonical vectors against the columns already placed.
  for (std::size_t k = 0; k < n; ++k) {
    if (s_sorted[k] > 0.0) continue;
    for (std::size_t cand = 0; cand < m; ++cand) {
      std::vector<double> w(m, 0.0);
      w[cand] = 1.0;
      for (std::size_t k2 = 0; k2 < n; ++k2) {
        if (k2 == k || (s_sorted[k2] == 0.0 && k2 > k)) continue;
        double d = 0.0;
        for (std::size_t i = 0; i < m; ++i) d += u_sorted(i, k2) * w[i];
        for (std::size_t i = 0; i < m; ++i) w[i] -= d * u_sorted(i, k2);
      }
      double nrm = 0.0;
      for (double x : w) nrm += x * x;
      nrm = std::sqrt(nrm);
      if (nrm > 0.5) {
        for (std::size_t i = 0; i < m; ++i) u_sorted(i, k) = w[i] / nrm;
        break;
      }
    }
  }

  SvdResult out;
  out.singular_values = std::move(s_sorted);
  if (transposed) {
    out.u = std::move(v_sorted);
    out.v = std::move(u_sorted);
  } else {
    out.u = std::move(u_sorted);
    out.v = std::move(v_sorted);
  }
  return out;
}

std::vector<double> solve_unit_lower_triangular(const DenseMatrix& b,
                                                const std::vector<double>& rhs) {
  if (b.rows() != b.cols())
    throw contract_error("solve_unit_lower_triangular: matrix must be square");
  if (rhs.size() != b.rows())
    throw contract_error("solve_unit_lower_triangular: rhs size mismatch");
  const std::size_t n = b.rows();
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = rhs[i];
    for (std::size_t j = 0; j < i; ++j) s -= b(i, j) * x[j];
    x[i] = s;
  }
  return x;
}

std::vector<double> solve_upper_triangular(const DenseMatrix& u,
                                           const std::vector<double>& rhs) {
  if (u.rows() != u.cols())
    throw contract_error("solve_upper_triangular: matrix must be square");
  if (rhs.size() != u.rows())
    throw contract_error("solve_upper_triangular: rhs size mismatch");
  const std::size_t n = u.rows();
  std::vector<double> x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = rhs[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= u(ii, j) * x[j];
    if (u(ii, ii) == 0.0)
      throw numeric_error("solve_upper_triangular: zero diagonal entry");
    x[ii] = s / u(ii, ii);
  }
  return x;
}

double cond2(const DenseMatrix& a) {
  if (a.max_abs() == 0.0) throw contract_error("cond2: zero matrix");
  const auto s = svd(a).singular_values;
  const double smax = s.front(), smin = s.back();
  if (smin < kSingularRel * smax) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

std::vector<double> lu_solve(DenseMatrix a, std::vector<double> rhs) {
  if (a.rows() != a.cols()) throw contract_error("lu_solve: matrix must be square");
  if (rhs.size() != a.rows()) throw contract_error("lu_solve: rhs size mismatch");
  const std::size_t n = a.rows();
  const double scale = a.max_abs();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (std::abs(a(piv, k)) <= kSingularRel * scale)
      throw numeric_error("lu_solve: matrix is numerically singular");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(rhs[k], rhs[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      a(i, k) = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      rhs[i] -= f * rhs[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = rhs[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * x[j];
    x[ii] = s / a(ii, ii);
  }
  return x;
}

double lu_determinant(DenseMatrix a) {
  if (a.rows() != a.cols())
    throw contract_error("lu_determinant: matrix must be square");
  const std::size_t n = a.rows();
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (a(piv, k) == 0.0) return 0.0;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      det = -det;
    }
    det *= a(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return det;
}

double weighted_dot(const std::vector<double>& v, const std::vector<double>& w,
                    double weight) {
  if (v.size() != w.size()) throw contract_error("weighted_dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * w[i];
  return weight * s;
}

std::size_t first_argmax_abs(const std::vector<double>& v) {
  if (v.empty()) throw contract_error("first_argmax_abs: empty vector");
  std::size_t best = 0;
  double best_val = std::abs(v[0]);
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > best_val) {
      best_val = std::abs(v[i]);
      best = i;
    }
  }
  return best;
}

GlobalArgmax global_first_argmax_abs(const DenseMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) {
    throw contract_error("global_first_argmax_abs: empty matrix");
  }
  GlobalArgmax best;
  best.value = -1.0;  // any real entry beats the sentinel
  for (std::size_t j = 0; j < a.cols(); ++j) {
    std::size_t row = 0;
    double column_max = std::abs(a(0, j));
    for (std::size_t i = 1; i < a.rows(); ++i) {
      if (std::abs(a(i, j)) > column_max) {
        column_max = std::abs(a(i, j));
        row = i;
      }
    }
    if (column_max > best.value) {
      best.value = column_max;
      best.row = row;
      best.col = j;
    }
  }
  return best;
}

}  // namespace lowrank
