#include "lowrank/eim.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "lowrank/errors.hpp"
#include "lowrank/kernels.hpp"

namespace lowrank {

namespace {

// Weighted discrete p-norm of one residual column (max norm is unweighted).
double column_norm(const DenseMatrix& r, std::size_t j, PNorm p, double weight) {
  double acc = 0.0;
  switch (p) {
    case PNorm::one:
      for (std::size_t i = 0; i < r.rows(); ++i) acc += std::abs(r(i, j));
      return weight * acc;
    case PNorm::two:
      for (std::size_t i = 0; i < r.rows(); ++i) acc += r(i, j) * r(i, j);
      return std::sqrt(weight * acc);
    case PNorm::inf:
      for (std::size_t i = 0; i < r.rows(); ++i) acc = std::max(acc, std::abs(r(i, j)));
      return acc;
  }
  return acc;
}

}  // namespace

const char* to_string(PNorm p) {
  switch (p) {
    case PNorm::one: return "1";
    case PNorm::two: return "2";
    case PNorm::inf: return "inf";
  }
  return "unknown";
}

EimSystem eim_greedy(const SnapshotMatrix& s, double tol, PNorm p, std::size_t max_rank) {
  if (!(tol > 0.0)) throw contract_error("eim_greedy: tol must be positive");
  const std::size_t m = s.rows();
  const std::size_t n = s.cols();
  if (m == 0 || n == 0) throw contract_error("eim_greedy: empty snapshot matrix");
  s.values.require_finite("eim_greedy");

  EimSystem sys;
  sys.norm_p = p;
  sys.weight = s.weight;
  sys.grid_x = s.grid_x;
  sys.grid_y = s.grid_y;
  const std::size_t cap = std::min(max_rank, std::min(m, n));

  DenseMatrix r = s.values;
  const double scale = r.max_abs();
  std::vector<std::vector<double>> coeff_rows;  // residual rows at the picks

  for (;;) {
    // Worst-approximated training column in the p-norm, then the row of the
    // largest residual entry inside it. For the max norm both levels are the
    // shared first-maximum scan, which makes the picks identical to cross
    // elimination with global pivoting.
    double err = 0.0;
    std::size_t j_best = 0, i_best = 0;
    if (p == PNorm::inf) {
      const GlobalArgmax g = global_first_argmax_abs(r);
      err = g.value;
      j_best = g.col;
      i_best = g.row;
    } else {
      double best = -1.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double norm_j = column_norm(r, j, p, s.weight);
        if (norm_j > best) {
          best = norm_j;
          j_best = j;
        }
      }
      err = best;
      i_best = first_argmax_abs(r.column(j_best));
    }

    sys.err_history.push_back(err);
    if (err < tol) {
      sys.status = AcaStatus::converged;
      break;
    }
    if (sys.q() == cap) {
      sys.status = cap < std::min(m, n) ? AcaStatus::rank_capped : AcaStatus::rank_exhausted;
      break;
    }
    const double pivot = r(i_best, j_best);
    if (!(std::abs(pivot) > kPivotFloorRel * scale)) {
      sys.status = AcaStatus::rank_exhausted;
      break;
    }

    const std::vector<double> u = r.column(j_best);
    const std::vector<double> v = r.row(i_best);
    std::vector<double> h(m);
    for (std::size_t i = 0; i < m; ++i) h[i] = u[i] / pivot;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) r(i, j) -= cross_term(u[i], v[j], pivot);

    sys.sample_indices.push_back(j_best);
    sys.interp_indices.push_back(i_best);
    sys.basis_h.push_back(std::move(h));
    coeff_rows.push_back(v);
  }

  const std::size_t q = sys.q();
  sys.b = DenseMatrix(q, q, 0.0);
  sys.recovery_s = DenseMatrix(q, q, 0.0);
  sys.training_coeffs = DenseMatrix(q, n, 0.0);
  for (std::size_t l = 0; l < q; ++l) {
    for (std::size_t k = 0; k < q; ++k) sys.b(k, l) = sys.basis_h[l][sys.interp_indices[k]];
    for (std::size_t j = 0; j < n; ++j) sys.training_coeffs(l, j) = coeff_rows[l][j];
  }
  // s(k, l) is the coefficient of h_{l+1} in the interpolant of column
  // j_{k+1} right before that column became basis k+1; the diagonal holds the
  // normalizing residual value.
  for (std::size_t k = 0; k < q; ++k) {
    for (std::size_t l = 0; l < k; ++l)
      sys.recovery_s(k, l) = sys.training_coeffs(l, sys.sample_indices[k]);
    sys.recovery_s(k, k) = coeff_rows[k][sys.sample_indices[k]];
  }
  return sys;
}

EimInterpolation eim_interpolate(const EimSystem& sys, const std::vector<double>& f) {
  const std::size_t m = sys.grid_x.size();
  if (f.size() != m) {
    throw contract_error("eim_interpolate: vector length does not match grid_x");
  }
  const std::size_t q = sys.q();
  std::vector<double> at_points(q);
  for (std::size_t k = 0; k < q; ++k) at_points[k] = f[sys.interp_indices[k]];
  EimInterpolation out;
  out.coefficients = solve_unit_lower_triangular(sys.b, at_points);
  out.values.assign(m, 0.0);
  for (std::size_t l = 0; l < q; ++l) {
    const double g = out.coefficients[l];
    for (std::size_t i = 0; i < m; ++i) out.values[i] += g * sys.basis_h[l][i];
  }
  return out;
}

EimContinuousBasis::EimContinuousBasis(const EimSystem& sys, BivariateSource src)
    : s_(sys.recovery_s), src_(std::move(src)) {
  sample_y_.reserve(sys.q());
  for (std::size_t j : sys.sample_indices) sample_y_.push_back(sys.grid_y.points[j]);
}

std::vector<double> EimContinuousBasis::basis_at(double x) const {
  const std::size_t q = sample_y_.size();
  std::vector<double> h(q, 0.0);
  for (std::size_t k = 0; k < q; ++k) {
    double value = src_(x, sample_y_[k]);
    for (std::size_t l = 0; l < k; ++l) value -= s_(k, l) * h[l];
    h[k] = value / s_(k, k);
  }
  return h;
}

EimContinuousBasis eim_continuous_recover(const EimSystem& sys, const BivariateSource& src) {
  return EimContinuousBasis(sys, src);
}

std::vector<double> lebesgue_constants(const std::vector<std::vector<double>>& basis_h,
                                       const DenseMatrix& b, std::size_t up_to_q) {
  if (up_to_q > basis_h.size()) {
    throw contract_error("lebesgue_constants: up_to_q exceeds the basis size");
  }
  std::vector<double> lambdas(up_to_q, 0.0);
  if (up_to_q == 0) return lambdas;
  const std::size_t m = basis_h[0].size();
  for (std::size_t q = 1; q <= up_to_q; ++q) {
    // The Lagrange values at a grid row solve B^T z = h(x); only the unit
    // lower part of B is the interpolation system, so its transpose is used
    // with an exact unit diagonal.
    DenseMatrix bt(q, q, 0.0);
    for (std::size_t i = 0; i < q; ++i) {
      bt(i, i) = 1.0;
      for (std::size_t j = i + 1; j < q; ++j) bt(i, j) = b(j, i);
    }
    double lambda = 0.0;
    std::vector<double> h(q);
    for (std::size_t row = 0; row < m; ++row) {
      for (std::size_t l = 0; l < q; ++l) h[l] = basis_h[l][row];
      const std::vector<double> z = solve_upper_triangular(bt, h);
      double l1 = 0.0;
      for (double v : z) l1 += std::abs(v);
      lambda = std::max(lambda, l1);
    }
    lambdas[q - 1] = lambda;
  }
  return lambdas;
}

std::vector<double> lebesgue_constants(const EimSystem& sys, std::size_t up_to_q) {
  return lebesgue_constants(sys.basis_h, sys.b, up_to_q);
}

PointSelection eim_points_for_basis(const std::vector<std::vector<double>>& basis_w,
                                    const Grid& grid) {
  const NodeSystem nodes = build_nodes(basis_w, grid);
  PointSelection sel;
  sel.interp_indices = nodes.nodes;
  const std::size_t q = nodes.nodes.size();
  sel.basis_h.reserve(q);
  for (std::size_t l = 0; l < q; ++l) {
    std::vector<double> h = nodes.ell_functions[l];
    const double pivot = h[nodes.nodes[l]];
    for (double& v : h) v /= pivot;
    sel.basis_h.push_back(std::move(h));
  }
  sel.b = DenseMatrix(q, q, 0.0);
  for (std::size_t l = 0; l < q; ++l)
    for (std::size_t k = 0; k < q; ++k) sel.b(k, l) = sel.basis_h[l][sel.interp_indices[k]];
  return sel;
}

GeimSystem geim_greedy(const SnapshotMatrix& s, const std::vector<Functional>& dictionary,
                       double tol, PNorm p, std::size_t max_rank) {
  if (!(tol > 0.0)) throw contract_error("geim_greedy: tol must be positive");
  if (dictionary.empty()) throw contract_error("geim_greedy: empty dictionary");
  const std::size_t m = s.rows();
  const std::size_t n = s.cols();
  if (m == 0 || n == 0) throw contract_error("geim_greedy: empty snapshot matrix");
  for (const Functional& sigma : dictionary) {
    if (sigma.weights.size() != m) {
      throw contract_error("geim_greedy: dictionary functional does not match grid_x");
    }
  }
  s.values.require_finite("geim_greedy");

  GeimSystem sys;
  sys.norm_p = p;
  const std::size_t cap = std::min(max_rank, std::min(dictionary.size(), std::min(m, n)));

  DenseMatrix r = s.values;
  // A functional's response to a residual is bounded by its l1 weight norm
  // times the residual level, so moments below that times the pivot floor
  // mean the dictionary no longer sees the residual.
  double dict_norm = 0.0;
  for (const Functional& sigma : dictionary) {
    double l1 = 0.0;
    for (double w : sigma.weights) l1 += std::abs(w);
    dict_norm = std::max(dict_norm, l1);
  }
  const double moment_floor = kPivotFloorRel * dict_norm * s.values.max_abs();

  for (;;) {
    double err = -1.0;
    std::size_t j_best = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double norm_j = column_norm(r, j, p, s.weight);
      if (norm_j > err) {
        err = norm_j;
        j_best = j;
      }
    }
    sys.err_history.push_back(err);
    if (err < tol) {
      sys.status = AcaStatus::converged;
      break;
    }
    if (sys.q() == cap) {
      sys.status = cap < std::min(dictionary.size(), std::min(m, n))
                       ? AcaStatus::rank_capped
                       : AcaStatus::rank_exhausted;
      break;
    }

    // Strongest dictionary response to the worst column's residual.
    const std::vector<double> res = r.column(j_best);
    std::size_t k_best = 0;
    double c_best = 0.0;
    double c_abs = -1.0;
    for (std::size_t k = 0; k < dictionary.size(); ++k) {
      const double c = dictionary[k].apply(res);
      if (std::abs(c) > c_abs) {
        c_abs = std::abs(c);
        c_best = c;
        k_best = k;
      }
    }
    if (!(c_abs > moment_floor)) {
      sys.status = AcaStatus::rank_exhausted;
      break;
    }

    std::vector<double> h(m);
    for (std::size_t i = 0; i < m; ++i) h[i] = res[i] / c_best;
    // Moment of the selected functional against every column, then the same
    // elimination expression as the point-based variants.
    std::vector<double> c_row(n);
    for (std::size_t j = 0; j < n; ++j) {
      double sum = 0.0;
      for (std::size_t i = 0; i < m; ++i) sum += dictionary[k_best].weights[i] * r(i, j);
      c_row[j] = sum;
    }
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) r(i, j) -= cross_term(res[i], c_row[j], c_best);

    sys.sample_indices.push_back(j_best);
    sys.moment_indices.push_back(k_best);
    sys.basis_h.push_back(std::move(h));
  }

  const std::size_t q = sys.q();
  sys.b = DenseMatrix(q, q, 0.0);
  for (std::size_t l = 0; l < q; ++l) {
    for (std::size_t k = 0; k < q; ++k) {
      sys.b(k, l) =
          k == l ? 1.0 : dictionary[sys.moment_indices[k]].apply(sys.basis_h[l]);
    }
  }
  return sys;
}

EimInterpolation geim_interpolate(const GeimSystem& sys,
                                  const std::vector<Functional>& dictionary,
                                  const std::vector<double>& f) {
  const std::size_t q = sys.q();
  if (q > 0 && f.size() != sys.basis_h[0].size()) {
    throw contract_error("geim_interpolate: vector length does not match the basis");
  }
  std::vector<double> moments(q);
  for (std::size_t k = 0; k < q; ++k) {
    const std::size_t idx = sys.moment_indices[k];
    if (idx >= dictionary.size()) {
      throw contract_error("geim_interpolate: dictionary is smaller than at build time");
    }
    moments[k] = dictionary[idx].apply(f);
  }
  EimInterpolation out;
  out.coefficients = solve_unit_lower_triangular(sys.b, moments);
  const std::size_t m = f.size();
  out.values.assign(m, 0.0);
  for (std::size_t l = 0; l < q; ++l) {
    const double g = out.coefficients[l];
    for (std::size_t i = 0; i < m; ++i) out.values[i] += g * sys.basis_h[l][i];
  }
  return out;
}

}  // namespace lowrank
