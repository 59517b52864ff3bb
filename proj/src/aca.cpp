#include "lowrank/aca.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "lowrank/errors.hpp"
#include "lowrank/kernels.hpp"
#include "lowrank/rng.hpp"

namespace lowrank {

namespace {

// Points where the trivariate denominator product is this small relative to
// the cubed remainder level are treated as already annihilated.
constexpr double kTrivariateGuardRel = 1e-13;

double vec_l2(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

void check_indices(const std::vector<std::size_t>& idx, std::size_t bound,
                   const char* what) {
  for (std::size_t i : idx) {
    if (i >= bound) {
      throw contract_error(std::string(what) + ": index " + std::to_string(i) +
                           " out of range (bound " + std::to_string(bound) + ")");
    }
  }
}

}  // namespace

const char* to_string(AcaStatus status) {
  switch (status) {
    case AcaStatus::converged: return "converged";
    case AcaStatus::rank_exhausted: return "rank_exhausted";
    case AcaStatus::rank_capped: return "rank_capped";
  }
  return "unknown";
}

DenseMatrix reconstruct(const CrossApproximation& ca) {
  DenseMatrix out(ca.rows, ca.cols, 0.0);
  for (std::size_t q = 0; q < ca.rank(); ++q) {
    const std::vector<double>& u = ca.u_vectors[q];
    const std::vector<double>& v = ca.v_vectors[q];
    const double pivot = ca.pivot_values[q];
    for (std::size_t i = 0; i < ca.rows; ++i)
      for (std::size_t j = 0; j < ca.cols; ++j) out(i, j) += cross_term(u[i], v[j], pivot);
  }
  return out;
}

Aca2Result aca2_bivariate(const SnapshotMatrix& s, double tol, PivotRule rule,
                          std::size_t max_rank) {
  if (!(tol > 0.0)) throw contract_error("aca2_bivariate: tol must be positive");
  const std::size_t m = s.rows();
  const std::size_t n = s.cols();
  if (m == 0 || n == 0) throw contract_error("aca2_bivariate: empty snapshot matrix");
  s.values.require_finite("aca2_bivariate");

  Aca2Result result;
  CrossApproximation& ca = result.cross;
  ca.rows = m;
  ca.cols = n;
  const std::size_t cap = std::min(max_rank, std::min(m, n));

  DenseMatrix r = s.values;
  result.remainder_history.push_back(r);
  double initial_max = -1.0;

  for (;;) {
    const double err = r.max_abs();
    ca.indicator_history.push_back(err);
    if (initial_max < 0.0) initial_max = err;
    if (err < tol) {
      ca.status = AcaStatus::converged;
      break;
    }
    if (ca.rank() == cap) {
      ca.status = cap < std::min(m, n) ? AcaStatus::rank_capped : AcaStatus::rank_exhausted;
      break;
    }

    std::size_t pivot_i = 0, pivot_j = 0;
    bool found = false;
    if (rule == PivotRule::global) {
      const GlobalArgmax g = global_first_argmax_abs(r);
      if (g.value > kPivotFloorRel * initial_max) {
        pivot_i = g.row;
        pivot_j = g.col;
        found = true;
      }
    } else {
      // Row from the previous column's largest entry; walk on cyclically past
      // rows that are already used or numerically zero.
      const std::size_t start =
          ca.u_vectors.empty() ? 0 : first_argmax_abs(ca.u_vectors.back());
      for (std::size_t off = 0; off < m && !found; ++off) {
        const std::size_t i = (start + off) % m;
        if (std::find(ca.tau.begin(), ca.tau.end(), i) != ca.tau.end()) continue;
        const std::vector<double> row = r.row(i);
        const std::size_t j = first_argmax_abs(row);
        if (std::abs(row[j]) > kPivotFloorRel * initial_max) {
          pivot_i = i;
          pivot_j = j;
          found = true;
        }
      }
    }
    if (!found) {
      ca.status = AcaStatus::rank_exhausted;
      break;
    }

    const std::vector<double> u = r.column(pivot_j);
    const std::vector<double> v = r.row(pivot_i);
    const double pivot = r(pivot_i, pivot_j);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) r(i, j) -= cross_term(u[i], v[j], pivot);

    ca.tau.push_back(pivot_i);
    ca.sigma.push_back(pivot_j);
    ca.u_vectors.push_back(u);
    ca.v_vectors.push_back(v);
    ca.pivot_values.push_back(pivot);
    result.remainder_history.push_back(r);
  }
  return result;
}

RowRuleSpec RowRuleSpec::randomized(std::uint64_t seed) {
  RowRuleSpec spec;
  spec.rule = RowRule::random;
  spec.seed = seed;
  return spec;
}

RowRuleSpec RowRuleSpec::node_based(Grid grid) {
  RowRuleSpec spec;
  spec.rule = RowRule::node_based;
  spec.row_grid = std::move(grid);
  return spec;
}

RowRuleSpec RowRuleSpec::given(std::vector<std::size_t> rows) {
  RowRuleSpec spec;
  spec.rule = RowRule::given;
  spec.given_rows = std::move(rows);
  return spec;
}

namespace {

// Incremental form of build_nodes: each add() eliminates the new basis vector
// against the ell functions found so far and returns the next node.
class NodeEliminator {
 public:
  std::size_t add(const std::vector<double>& w) {
    std::vector<double> cur = w;
    const double scale = std::abs(cur[first_argmax_abs(cur)]);
    for (std::size_t q = 0; q < nodes_.size(); ++q) {
      const std::vector<double>& ell = ells_[q];
      const double c = cur[nodes_[q]] / ell[nodes_[q]];
      for (std::size_t i = 0; i < cur.size(); ++i) cur[i] -= c * ell[i];
    }
    const std::size_t node = first_argmax_abs(cur);
    if (!(std::abs(cur[node]) > 1e-14 * scale)) {
      throw numeric_error(
          "node construction: basis function " + std::to_string(nodes_.size()) +
          " is numerically dependent on the previous ones");
    }
    nodes_.push_back(node);
    ells_.push_back(std::move(cur));
    return node;
  }

  std::vector<std::size_t> take_nodes() { return std::move(nodes_); }
  std::vector<std::vector<double>> take_ells() { return std::move(ells_); }

 private:
  std::vector<std::size_t> nodes_;
  std::vector<std::vector<double>> ells_;
};

}  // namespace

std::vector<std::vector<double>> monomial_basis(const Grid& grid, std::size_t count) {
  if (count == 0) throw contract_error("monomial_basis: count must be positive");
  std::vector<std::vector<double>> basis;
  basis.reserve(count);
  std::vector<double> current(grid.points.size(), 1.0);
  for (std::size_t k = 0; k < count; ++k) {
    basis.push_back(current);
    for (std::size_t i = 0; i < current.size(); ++i) current[i] *= grid.points[i];
  }
  return basis;
}

NodeSystem build_nodes(const std::vector<std::vector<double>>& basis_w, const Grid& grid,
                       const std::string& basis_tag) {
  if (basis_w.empty()) throw contract_error("build_nodes: empty basis");
  for (const std::vector<double>& w : basis_w) {
    if (w.size() != grid.points.size()) {
      throw contract_error("build_nodes: basis vector length does not match the grid");
    }
  }
  NodeEliminator eliminator;
  for (const std::vector<double>& w : basis_w) eliminator.add(w);
  NodeSystem system;
  system.nodes = eliminator.take_nodes();
  system.ell_functions = eliminator.take_ells();
  system.basis_tag = basis_tag;
  return system;
}

CrossApproximation aca_matrix(const EntryProvider& entry, std::size_t rows,
                              std::size_t cols, double tol, const RowRuleSpec& rule,
                              std::size_t max_rank) {
  if (!(tol > 0.0)) throw contract_error("aca_matrix: tol must be positive");
  if (rows == 0 || cols == 0) throw contract_error("aca_matrix: empty matrix");
  if (!entry) throw contract_error("aca_matrix: entry provider not set");
  if (rule.rule == RowRule::node_based && rule.row_grid.points.size() != rows) {
    throw contract_error("aca_matrix: node rule grid does not match the row count");
  }

  CrossApproximation ca;
  ca.rows = rows;
  ca.cols = cols;
  const std::size_t cap = std::min(max_rank, std::min(rows, cols));

  SplitMix64 rng(rule.seed);
  NodeEliminator node_eliminator;
  std::vector<double> node_monomial(rule.rule == RowRule::node_based ? rows : 0, 1.0);
  std::size_t given_pos = 0;
  std::vector<char> used(rows, 0);
  std::size_t used_count = 0;

  // Residual row i of the implicit remainder, assembled from the factors.
  auto residual_row = [&](std::size_t i) {
    std::vector<double> v(cols);
    for (std::size_t j = 0; j < cols; ++j) v[j] = entry(i, j);
    for (std::size_t l = 0; l < ca.rank(); ++l) {
      const double u_i = ca.u_vectors[l][i];
      const double pivot = ca.pivot_values[l];
      const std::vector<double>& vl = ca.v_vectors[l];
      for (std::size_t j = 0; j < cols; ++j) v[j] -= cross_term(u_i, vl[j], pivot);
    }
    return v;
  };
  auto residual_column = [&](std::size_t j) {
    std::vector<double> u(rows);
    for (std::size_t i = 0; i < rows; ++i) u[i] = entry(i, j);
    for (std::size_t l = 0; l < ca.rank(); ++l) {
      const double v_j = ca.v_vectors[l][j];
      const double pivot = ca.pivot_values[l];
      const std::vector<double>& ul = ca.u_vectors[l];
      for (std::size_t i = 0; i < rows; ++i) u[i] -= cross_term(ul[i], v_j, pivot);
    }
    return u;
  };
  // Only rows that are *identically* zero are retired here; rows reduced to
  // round-off noise still become candidates so the error indicator can stop
  // the iteration (their pivot is nonzero, so no division blows up).
  auto row_is_zero = [&](const std::vector<double>& v) {
    return std::abs(v[first_argmax_abs(v)]) == 0.0;
  };

  bool given_exhausted = false;
  for (;;) {
    if (ca.rank() == cap) {
      ca.status =
          cap < std::min(rows, cols) ? AcaStatus::rank_capped : AcaStatus::rank_exhausted;
      break;
    }

    // Pick the next usable row; rows found to be numerically zero are retired
    // for good (a zero residual row stays zero in later steps).
    std::size_t row_index = rows;
    std::vector<double> v;
    switch (rule.rule) {
      case RowRule::cyclic: {
        const std::size_t start =
            ca.u_vectors.empty() ? 0 : first_argmax_abs(ca.u_vectors.back());
        for (std::size_t off = 0; off < rows && row_index == rows; ++off) {
          const std::size_t i = (start + off) % rows;
          if (used[i]) continue;
          std::vector<double> candidate = residual_row(i);
          if (row_is_zero(candidate)) {
            used[i] = 1;
            ++used_count;
            continue;
          }
          row_index = i;
          v = std::move(candidate);
        }
        break;
      }
      case RowRule::random: {
        while (used_count < rows && row_index == rows) {
          const std::size_t i = rng.below(rows);
          if (used[i]) continue;
          std::vector<double> candidate = residual_row(i);
          if (row_is_zero(candidate)) {
            used[i] = 1;
            ++used_count;
            continue;
          }
          row_index = i;
          v = std::move(candidate);
        }
        break;
      }
      case RowRule::node_based: {
        while (row_index == rows) {
          std::size_t i;
          try {
            i = node_eliminator.add(node_monomial);
          } catch (const numeric_error&) {
            break;  // monomials exhausted their independence on this grid
          }
          for (std::size_t p = 0; p < rows; ++p)
            node_monomial[p] *= rule.row_grid.points[p];
          if (used[i]) continue;
          std::vector<double> candidate = residual_row(i);
          if (row_is_zero(candidate)) {
            used[i] = 1;
            ++used_count;
            continue;
          }
          row_index = i;
          v = std::move(candidate);
        }
        break;
      }
      case RowRule::given: {
        if (given_pos == rule.given_rows.size()) {
          given_exhausted = true;
          break;
        }
        const std::size_t i = rule.given_rows[given_pos++];
        if (i >= rows) throw contract_error("aca_matrix: given row out of range");
        if (used[i]) throw contract_error("aca_matrix: given row repeated");
        std::vector<double> candidate = residual_row(i);
        if (row_is_zero(candidate)) {
          throw contract_error("aca_matrix: given row " + std::to_string(i) +
                               " is identically zero");
        }
        row_index = i;
        v = std::move(candidate);
        break;
      }
    }
    if (row_index == rows) {
      ca.status = given_exhausted ? AcaStatus::rank_capped : AcaStatus::rank_exhausted;
      break;
    }

    used[row_index] = 1;
    ++used_count;
    const std::size_t col_index = first_argmax_abs(v);
    const double pivot = v[col_index];
    const std::vector<double> u = residual_column(col_index);

    // Cheap error indicator of the freshly computed rank-1 candidate.
    const double indicator = vec_l2(u) * vec_l2(v) / std::abs(pivot);
    ca.indicator_history.push_back(indicator);
    if (indicator < tol) {
      ca.status = AcaStatus::converged;
      break;
    }

    ca.tau.push_back(row_index);
    ca.sigma.push_back(col_index);
    ca.u_vectors.push_back(u);
    ca.v_vectors.push_back(std::move(v));
    ca.pivot_values.push_back(pivot);
  }
  return ca;
}

double CrossInterpolant::evaluate(const std::vector<double>& row_values,
                                  const std::vector<double>& col_values) const {
  const std::size_t q = tau.size();
  if (row_values.size() != q || col_values.size() != q) {
    throw contract_error("CrossInterpolant::evaluate: value vectors must have length " +
                         std::to_string(q));
  }
  const std::vector<double> z = solve_unit_lower_triangular(lower, col_values);
  const std::vector<double> t = solve_upper_triangular(upper, z);
  double sum = 0.0;
  for (std::size_t p = 0; p < q; ++p) sum += row_values[p] * t[p];
  return sum;
}

CrossInterpolant cross_interpolant(const CrossApproximation& ca) {
  const std::size_t q = ca.rank();
  if (q == 0) throw contract_error("cross_interpolant: empty cross approximation");
  CrossInterpolant ci;
  ci.tau = ca.tau;
  ci.sigma = ca.sigma;
  ci.lower = DenseMatrix(q, q, 0.0);
  ci.upper = DenseMatrix(q, q, 0.0);
  // The elimination history *is* an LU factorization of the cross matrix:
  // M(p,r) = sum_l (u_l[tau_p] / pivot_l) * v_l[sigma_r] with vanishing
  // factors beyond min(p,r), so L holds the scaled u entries and U the raw v
  // entries.
  for (std::size_t p = 0; p < q; ++p) {
    for (std::size_t l = 0; l <= p; ++l) {
      ci.lower(p, l) = ca.u_vectors[l][ca.tau[p]] / ca.pivot_values[l];
    }
    for (std::size_t l = p; l < q; ++l) {
      ci.upper(p, l) = ca.v_vectors[p][ca.sigma[l]];
    }
  }
  return ci;
}

DenseMatrix interpolant_matrix(const CrossApproximation& ca, const DenseMatrix& a) {
  if (a.rows() != ca.rows || a.cols() != ca.cols) {
    throw contract_error("interpolant_matrix: matrix shape does not match the cross");
  }
  const CrossInterpolant ci = cross_interpolant(ca);
  const std::size_t q = ca.rank();
  DenseMatrix out(a.rows(), a.cols(), 0.0);
  std::vector<double> row_values(q), col_values(q);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t p = 0; p < q; ++p) row_values[p] = a(i, ca.sigma[p]);
    for (std::size_t j = 0; j < a.cols(); ++j) {
      for (std::size_t p = 0; p < q; ++p) col_values[p] = a(ca.tau[p], j);
      out(i, j) = ci.evaluate(row_values, col_values);
    }
  }
  return out;
}

namespace {

DenseMatrix cross_matrix(const DenseMatrix& values, const std::vector<std::size_t>& tau,
                         const std::vector<std::size_t>& sigma) {
  DenseMatrix m(tau.size(), sigma.size(), 0.0);
  for (std::size_t p = 0; p < tau.size(); ++p)
    for (std::size_t r = 0; r < sigma.size(); ++r) m(p, r) = values(tau[p], sigma[r]);
  return m;
}

void check_cross_indices(const SnapshotMatrix& s, const std::vector<std::size_t>& tau,
                         const std::vector<std::size_t>& sigma, const char* what) {
  if (tau.empty() || tau.size() != sigma.size()) {
    throw contract_error(std::string(what) + ": tau and sigma must be nonempty and equal-sized");
  }
  check_indices(tau, s.rows(), what);
  check_indices(sigma, s.cols(), what);
}

}  // namespace

double sigma2(const SnapshotMatrix& s, const std::vector<std::size_t>& tau,
              const std::vector<std::size_t>& sigma) {
  check_cross_indices(s, tau, sigma, "sigma2");
  const std::size_t q = tau.size();
  const DenseMatrix m = cross_matrix(s.values, tau, sigma);
  double best = 0.0;
  std::vector<double> rhs(q);
  for (std::size_t j = 0; j < s.cols(); ++j) {
    for (std::size_t p = 0; p < q; ++p) rhs[p] = s.values(tau[p], j);
    const std::vector<double> c = lu_solve(m, rhs);
    double l1 = 0.0;
    for (double x : c) l1 += std::abs(x);
    best = std::max(best, l1);
  }
  return best;
}

double sigma1(const SnapshotMatrix& s, const std::vector<std::size_t>& tau,
              const std::vector<std::size_t>& sigma) {
  check_cross_indices(s, tau, sigma, "sigma1");
  const std::size_t q = tau.size();
  const DenseMatrix mt = cross_matrix(s.values, tau, sigma).transposed();
  double best = 0.0;
  std::vector<double> rhs(q);
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t p = 0; p < q; ++p) rhs[p] = s.values(i, sigma[p]);
    const std::vector<double> c = lu_solve(mt, rhs);
    double l1 = 0.0;
    for (double x : c) l1 += std::abs(x);
    best = std::max(best, l1);
  }
  return best;
}

MaxVolumeReport max_volume_check(const DenseMatrix& a, const std::vector<std::size_t>& tau,
                                 const std::vector<std::size_t>& sigma) {
  if (tau.empty() || tau.size() != sigma.size()) {
    throw contract_error("max_volume_check: tau and sigma must be nonempty and equal-sized");
  }
  if (tau.size() > 6) {
    throw contract_error("max_volume_check: exhaustive check is limited to rank 6");
  }
  check_indices(tau, a.rows(), "max_volume_check");
  check_indices(sigma, a.cols(), "max_volume_check");

  const std::size_t q = tau.size();
  const DenseMatrix m = cross_matrix(a, tau, sigma);
  const double det_m = lu_determinant(m);
  MaxVolumeReport report;
  if (det_m == 0.0) {
    report.singular = true;
    report.holds = false;
    return report;
  }
  for (std::size_t pos = 0; pos < q; ++pos) {
    for (std::size_t col = 0; col < a.cols(); ++col) {
      DenseMatrix replaced = m;
      for (std::size_t p = 0; p < q; ++p) replaced(p, pos) = a(tau[p], col);
      const double ratio = std::abs(lu_determinant(replaced)) / std::abs(det_m);
      if (ratio > report.max_ratio) {
        report.max_ratio = ratio;
        report.worst_position = pos;
        report.worst_column = col;
      }
    }
  }
  report.holds = report.max_ratio <= 1.0 + 1e-12;
  return report;
}

FunctionalCross aca_functional(const SnapshotMatrix& s, const std::vector<Functional>& phis,
                               const std::vector<Functional>& psis, double tol,
                               std::size_t max_rank) {
  if (!(tol > 0.0)) throw contract_error("aca_functional: tol must be positive");
  if (phis.empty() || psis.empty()) {
    throw contract_error("aca_functional: empty functional dictionary");
  }
  const std::size_t m = s.rows();
  const std::size_t n = s.cols();
  for (const Functional& phi : phis) {
    if (phi.weights.size() != m) {
      throw contract_error("aca_functional: phi dictionary does not match grid_x");
    }
  }
  for (const Functional& psi : psis) {
    if (psi.weights.size() != n) {
      throw contract_error("aca_functional: psi dictionary does not match grid_y");
    }
  }
  s.values.require_finite("aca_functional");

  FunctionalCross out;
  CrossApproximation& ca = out.cross;
  ca.rows = m;
  ca.cols = n;
  const std::size_t natural_cap =
      std::min(std::min(phis.size(), psis.size()), std::min(m, n));
  const std::size_t cap = std::min(max_rank, natural_cap);

  DenseMatrix r = s.values;
  double initial_max = -1.0;

  for (;;) {
    // Column moments u_b = r * psi_b, then the full moment matrix against the
    // phi dictionary. With Dirac dictionaries this *is* the remainder, so the
    // shared scan reproduces global pivoting bitwise.
    std::vector<std::vector<double>> column_moments(psis.size());
    DenseMatrix moments(phis.size(), psis.size(), 0.0);
    for (std::size_t b = 0; b < psis.size(); ++b) {
      std::vector<double> col(m, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += r(i, j) * psis[b].weights[j];
        col[i] = sum;
      }
      for (std::size_t a = 0; a < phis.size(); ++a) {
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) sum += phis[a].weights[i] * col[i];
        moments(a, b) = sum;
      }
      column_moments[b] = std::move(col);
    }

    const GlobalArgmax g = global_first_argmax_abs(moments);
    ca.indicator_history.push_back(g.value);
    if (initial_max < 0.0) initial_max = g.value;
    if (g.value < tol) {
      ca.status = AcaStatus::converged;
      break;
    }
    if (ca.rank() == cap) {
      ca.status = cap < natural_cap ? AcaStatus::rank_capped : AcaStatus::rank_exhausted;
      break;
    }
    if (!(g.value > kPivotFloorRel * initial_max)) {
      ca.status = AcaStatus::rank_exhausted;
      break;
    }

    const std::size_t a_star = g.row;
    const std::size_t b_star = g.col;
    const std::vector<double> u = column_moments[b_star];
    std::vector<double> v(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      double sum = 0.0;
      for (std::size_t i = 0; i < m; ++i) sum += phis[a_star].weights[i] * r(i, j);
      v[j] = sum;
    }
    const double pivot = moments(a_star, b_star);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) r(i, j) -= cross_term(u[i], v[j], pivot);

    ca.tau.push_back(a_star);
    ca.sigma.push_back(b_star);
    ca.u_vectors.push_back(u);
    ca.v_vectors.push_back(std::move(v));
    ca.pivot_values.push_back(pivot);
  }
  out.remainder = std::move(r);
  return out;
}

TrivariateCross aca_trivariate(const TrivariateSample& t, double tol,
                               std::size_t max_rank) {
  if (!(tol > 0.0)) throw contract_error("aca_trivariate: tol must be positive");
  const std::size_t nx = t.values.nx, ny = t.values.ny, nz = t.values.nz;
  if (nx == 0 || ny == 0 || nz == 0) {
    throw contract_error("aca_trivariate: empty sample tensor");
  }
  for (double v : t.values.data) {
    if (!std::isfinite(v)) throw numeric_error("aca_trivariate: non-finite sample value");
  }

  TrivariateCross out;
  const std::size_t cap = std::min(max_rank, std::min(nx, std::min(ny, nz)));
  Tensor3 r = t.values;
  out.remainder_history.push_back(r);
  double initial_max = -1.0;

  for (;;) {
    // First maximum in x-major scan order.
    double best = -1.0;
    TrivariatePivot p;
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t k = 0; k < nz; ++k) {
          const double v = std::abs(r(i, j, k));
          if (v > best) {
            best = v;
            p = {i, j, k};
          }
        }

    out.indicator_history.push_back(best);
    if (initial_max < 0.0) initial_max = best;
    if (best < tol) {
      out.status = AcaStatus::converged;
      break;
    }
    if (out.rank() == cap) {
      out.status = cap < std::min(nx, std::min(ny, nz)) ? AcaStatus::rank_capped
                                                        : AcaStatus::rank_exhausted;
      break;
    }
    if (!(best > kPivotFloorRel * initial_max)) {
      out.status = AcaStatus::rank_exhausted;
      break;
    }

    const double pivot = r(p.i, p.j, p.k);
    const double guard = kTrivariateGuardRel * best * best * best;
    Tensor3 next = r;
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t k = 0; k < nz; ++k) {
          const double den = (r(i, p.j, p.k) * r(p.i, j, p.k)) * r(p.i, p.j, k);
          if (!(std::abs(den) > guard)) continue;  // already annihilated here
          const double num = ((r(i, j, p.k) * r(i, p.j, k)) * r(p.i, j, k)) * pivot;
          next(i, j, k) = r(i, j, k) - num / den;
        }
    r = std::move(next);
    out.pivots.push_back(p);
    out.pivot_values.push_back(pivot);
    out.remainder_history.push_back(r);
  }
  return out;
}

}  // namespace lowrank
