#include "lowrank/gappy.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "lowrank/errors.hpp"
#include "lowrank/kernels.hpp"

namespace lowrank {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_basis(const std::vector<std::vector<double>>& basis_h) {
  if (basis_h.empty()) throw contract_error("gappy: basis must not be empty");
  const std::size_t m = basis_h.front().size();
  if (m == 0) throw contract_error("gappy: basis vectors must not be empty");
  for (const auto& h : basis_h) {
    if (h.size() != m) throw contract_error("gappy: basis vectors must have equal length");
  }
}

void check_sensors(const std::vector<std::size_t>& sensors, std::size_t m) {
  if (sensors.empty()) throw contract_error("gappy: sensor list must not be empty");
  for (std::size_t k = 0; k < sensors.size(); ++k) {
    if (sensors[k] >= m) throw contract_error("gappy: sensor index out of range");
    for (std::size_t j = 0; j < k; ++j) {
      if (sensors[j] == sensors[k]) {
        throw contract_error("gappy: sensor indices must be distinct");
      }
    }
  }
}

// Condition number that reports an identically-zero Gram as singular instead
// of a contract violation.
double gram_cond2(const DenseMatrix& gram) {
  if (gram.max_abs() == 0.0) return kInf;
  return cond2(gram);
}

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
  throw contract_error("column_norm: unknown norm selector");
}

// Gram of the leading k basis functions over sensors + one tentative point,
// in the same summation order gappy_gram would use for that sensor list.
DenseMatrix tentative_gram(const std::vector<std::vector<double>>& basis_h, std::size_t k,
                           const DenseMatrix& base, std::size_t x, double scale) {
  DenseMatrix gram(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      gram(i, j) = scale * (base(i, j) + basis_h[i][x] * basis_h[j][x]);
      gram(j, i) = gram(i, j);
    }
  }
  return gram;
}

void accumulate_outer(DenseMatrix& base, const std::vector<std::vector<double>>& basis_h,
                      std::size_t x) {
  for (std::size_t i = 0; i < base.rows(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      base(i, j) += basis_h[i][x] * basis_h[j][x];
      base(j, i) = base(i, j);
    }
  }
}

// Continues the condition-number greedy until `target_count` sensors are
// placed, appending the winning condition number of each step to `history`.
void extend_sensors_cond(const std::vector<std::vector<double>>& basis_h, double measure,
                         std::size_t target_count, std::vector<std::size_t>& sensors,
                         std::vector<double>& history) {
  const std::size_t q = basis_h.size();
  const std::size_t m = basis_h.front().size();
  std::vector<char> used(m, 0);
  DenseMatrix base(q, q);
  for (std::size_t x : sensors) {
    used[x] = 1;
    accumulate_outer(base, basis_h, x);
  }
  for (std::size_t l = sensors.size() + 1; l <= target_count; ++l) {
    const std::size_t k = std::min(q, l);
    const double scale = measure / static_cast<double>(l);
    double best_kappa = kInf;
    std::size_t best_x = m;
    for (std::size_t x = 0; x < m; ++x) {
      if (used[x]) continue;
      const double kappa = gram_cond2(tentative_gram(basis_h, k, base, x, scale));
      if (best_x == m || kappa < best_kappa) {
        best_kappa = kappa;
        best_x = x;
      }
    }
    sensors.push_back(best_x);
    used[best_x] = 1;
    accumulate_outer(base, basis_h, best_x);
    history.push_back(best_kappa);
  }
}

}  // namespace

DenseMatrix gappy_gram(const std::vector<std::vector<double>>& basis_h,
                       const std::vector<std::size_t>& sensors, double measure) {
  check_basis(basis_h);
  check_sensors(sensors, basis_h.front().size());
  if (!(measure > 0.0)) throw contract_error("gappy_gram: measure must be positive");
  const std::size_t q = basis_h.size();
  const double scale = measure / static_cast<double>(sensors.size());
  DenseMatrix gram(q, q);
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = 0.0;
      for (std::size_t x : sensors) acc += basis_h[i][x] * basis_h[j][x];
      gram(i, j) = scale * acc;
      gram(j, i) = gram(i, j);
    }
  }
  return gram;
}

GappySystem make_gappy_system(std::vector<std::vector<double>> basis_h,
                              std::vector<std::size_t> sensors, double measure) {
  GappySystem sys;
  sys.gram = gappy_gram(basis_h, sensors, measure);
  sys.gram_cond = gram_cond2(sys.gram);
  sys.dof_count = basis_h.front().size();
  sys.basis_h = std::move(basis_h);
  sys.sensors = std::move(sensors);
  sys.mode = GappyMode::nodal;
  sys.measure = measure;
  return sys;
}

GappySystem make_generalized_system(std::vector<std::vector<double>> basis_h,
                                    std::vector<Functional> functionals, DenseMatrix g,
                                    double measure) {
  check_basis(basis_h);
  if (functionals.empty()) throw contract_error("gappy: functional list must not be empty");
  const std::size_t m = basis_h.front().size();
  const std::size_t count = functionals.size();
  for (const Functional& phi : functionals) {
    if (phi.weights.size() != m) {
      throw contract_error("gappy: functional weight length must match basis length");
    }
  }
  if (g.rows() != count || g.cols() != count) {
    throw contract_error("gappy: scalar-product table must be square over the functionals");
  }
  if (!(measure > 0.0)) throw contract_error("gappy: measure must be positive");

  GappySystem sys;
  const std::size_t q = basis_h.size();
  DenseMatrix sig(count, q);
  for (std::size_t l = 0; l < count; ++l) {
    for (std::size_t p = 0; p < q; ++p) sig(l, p) = functionals[l].apply(basis_h[p]);
  }
  const double prefactor = static_cast<double>(m) / static_cast<double>(count);
  sys.gram = DenseMatrix(q, q);
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = 0.0;
      for (std::size_t l = 0; l < count; ++l) {
        for (std::size_t k = 0; k < count; ++k) acc += sig(l, j) * g(l, k) * sig(k, i);
      }
      sys.gram(i, j) = prefactor * acc;
      sys.gram(j, i) = sys.gram(i, j);
    }
  }
  sys.gram_cond = gram_cond2(sys.gram);
  sys.dof_count = m;
  sys.basis_h = std::move(basis_h);
  sys.functionals = std::move(functionals);
  sys.mode = GappyMode::generalized;
  sys.gen_gram_g = std::move(g);
  sys.measure = measure;
  return sys;
}

std::vector<double> gappy_generalized_project(
    const std::vector<std::vector<double>>& basis_h,
    const std::vector<Functional>& functionals, const DenseMatrix& g,
    const std::vector<double>& dofs_of_f) {
  check_basis(basis_h);
  if (functionals.empty()) throw contract_error("gappy: functional list must not be empty");
  const std::size_t m = basis_h.front().size();
  const std::size_t count = functionals.size();
  for (const Functional& phi : functionals) {
    if (phi.weights.size() != m) {
      throw contract_error("gappy: functional weight length must match basis length");
    }
  }
  if (g.rows() != count || g.cols() != count) {
    throw contract_error("gappy: scalar-product table must be square over the functionals");
  }
  if (dofs_of_f.size() != count) {
    throw contract_error("gappy: measured data length must match functional count");
  }

  const std::size_t q = basis_h.size();
  DenseMatrix sig(count, q);
  for (std::size_t l = 0; l < count; ++l) {
    for (std::size_t p = 0; p < q; ++p) sig(l, p) = functionals[l].apply(basis_h[p]);
  }
  DenseMatrix a(q, q);
  std::vector<double> rhs(q, 0.0);
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t p = 0; p < q; ++p) {
      double acc = 0.0;
      for (std::size_t l = 0; l < count; ++l) {
        for (std::size_t k = 0; k < count; ++k) acc += sig(l, p) * g(l, k) * sig(k, i);
      }
      a(i, p) = acc;
    }
    double acc = 0.0;
    for (std::size_t l = 0; l < count; ++l) {
      for (std::size_t k = 0; k < count; ++k) acc += dofs_of_f[l] * g(l, k) * sig(k, i);
    }
    rhs[i] = acc;
  }
  return lu_solve(a, rhs);
}

GappyProjection gappy_project(const GappySystem& sys, const std::vector<double>& f_at_sensors) {
  check_basis(sys.basis_h);
  const std::size_t m = sys.basis_h.front().size();
  if (f_at_sensors.size() != sys.sensor_count()) {
    throw contract_error("gappy_project: data length must match sensor count");
  }
  if (!std::isfinite(sys.gram_cond)) {
    throw numeric_error("gappy_project: insufficient sensors for basis");
  }

  GappyProjection out;
  try {
    if (sys.mode == GappyMode::nodal) {
      // Nodal projection is the generalized one with point evaluations and a
      // scaled-identity scalar-product table; delegating keeps the two modes
      // exactly interchangeable.
      std::vector<Functional> diracs;
      diracs.reserve(sys.sensors.size());
      for (std::size_t x : sys.sensors) diracs.push_back(Functional::dirac(x, m));
      DenseMatrix g(sys.sensors.size(), sys.sensors.size());
      const double unit = sys.measure / static_cast<double>(sys.dof_count);
      for (std::size_t l = 0; l < sys.sensors.size(); ++l) g(l, l) = unit;
      out.coefficients = gappy_generalized_project(sys.basis_h, diracs, g, f_at_sensors);
    } else {
      out.coefficients =
          gappy_generalized_project(sys.basis_h, sys.functionals, sys.gen_gram_g, f_at_sensors);
    }
  } catch (const numeric_error&) {
    throw numeric_error("gappy_project: insufficient sensors for basis");
  }

  out.values.assign(m, 0.0);
  for (std::size_t p = 0; p < sys.q(); ++p) {
    for (std::size_t i = 0; i < m; ++i) out.values[i] += out.coefficients[p] * sys.basis_h[p][i];
  }
  return out;
}

SensorPlacement place_sensors_cond(const std::vector<std::vector<double>>& basis_h,
                                   const Grid& grid, std::size_t count) {
  check_basis(basis_h);
  const std::size_t m = basis_h.front().size();
  if (grid.points.size() != m) {
    throw contract_error("place_sensors_cond: grid size must match basis length");
  }
  if (count == 0) throw contract_error("place_sensors_cond: sensor count must be positive");
  if (count > m) throw contract_error("place_sensors_cond: more sensors than grid points");

  SensorPlacement out;
  // Every nonzero point gives the same 1x1 condition number, so the first
  // sensor is the first maximizer of |h_1|.
  const std::size_t first = first_argmax_abs(basis_h.front());
  if (basis_h.front()[first] == 0.0) {
    throw contract_error("place_sensors_cond: leading basis vector is identically zero");
  }
  out.sensors.push_back(first);
  out.history.push_back(1.0);
  extend_sensors_cond(basis_h, grid.domain_measure, count, out.sensors, out.history);
  return out;
}

SensorPlacement place_sensors_error(const std::vector<std::vector<double>>& basis_h,
                                    const SnapshotMatrix& s, std::size_t count, PNorm p) {
  check_basis(basis_h);
  const std::size_t m = basis_h.front().size();
  const std::size_t n = s.values.cols();
  if (s.values.rows() != m) {
    throw contract_error("place_sensors_error: snapshot rows must match basis length");
  }
  if (count == 0) throw contract_error("place_sensors_error: sensor count must be positive");
  if (count > m) throw contract_error("place_sensors_error: more sensors than grid points");

  const std::size_t q = basis_h.size();
  const double measure = s.grid_x.domain_measure;
  SensorPlacement out;
  std::vector<char> used(m, 0);
  DenseMatrix base(q, q);

  // Residual of every training column after fitting the leading k basis
  // functions on the sensors placed so far; k = 0 means the zero fit.
  const auto residuals = [&](std::size_t k) {
    DenseMatrix res(m, n);
    std::vector<std::vector<double>> coeffs(n);
    if (k > 0) {
      std::vector<std::vector<double>> head(basis_h.begin(),
                                            basis_h.begin() + static_cast<std::ptrdiff_t>(k));
      const DenseMatrix gram = gappy_gram(head, out.sensors, measure);
      const double scale = measure / static_cast<double>(out.sensors.size());
      for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> rhs(k, 0.0);
        for (std::size_t p2 = 0; p2 < k; ++p2) {
          double acc = 0.0;
          for (std::size_t x : out.sensors) acc += s.values(x, j) * basis_h[p2][x];
          rhs[p2] = scale * acc;
        }
        coeffs[j] = lu_solve(gram, rhs);
      }
    }
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        double v = s.values(i, j);
        for (std::size_t p2 = 0; p2 < k; ++p2) v -= coeffs[j][p2] * basis_h[p2][i];
        res(i, j) = v;
      }
    }
    return res;
  };

  const auto worst_column = [&](const DenseMatrix& res) {
    std::size_t worst = 0;
    double worst_norm = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double nrm = column_norm(res, j, p, s.weight);
      if (nrm > worst_norm) {
        worst_norm = nrm;
        worst = j;
      }
    }
    return std::pair<std::size_t, double>{worst, worst_norm};
  };

  for (std::size_t l = 1; l <= count; ++l) {
    const DenseMatrix res = residuals(std::min(q, l - 1));
    const auto [worst, worst_norm] = worst_column(res);
    out.history.push_back(worst_norm);

    // Candidate points in decreasing residual magnitude; a candidate whose
    // would-be Gram is singular is skipped.
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double fa = std::abs(res(a, worst));
      const double fb = std::abs(res(b, worst));
      if (fa != fb) return fa > fb;
      return a < b;
    });
    const std::size_t k = std::min(q, l);
    const double scale = measure / static_cast<double>(l);
    std::size_t chosen = m;
    for (std::size_t x : order) {
      if (used[x]) continue;
      if (std::isinf(gram_cond2(tentative_gram(basis_h, k, base, x, scale)))) continue;
      chosen = x;
      break;
    }
    if (chosen == m) {
      throw numeric_error("place_sensors_error: no admissible sensor location left");
    }
    out.sensors.push_back(chosen);
    used[chosen] = 1;
    accumulate_outer(base, basis_h, chosen);
  }
  out.history.push_back(worst_column(residuals(std::min(q, count))).second);
  return out;
}

GappySystem eim_then_stabilize(const SnapshotMatrix& s, double tol, std::size_t extra, PNorm p) {
  const EimSystem eim = eim_greedy(s, tol, p);
  if (eim.q() == 0) {
    throw numeric_error("eim_then_stabilize: greedy selected no basis functions");
  }
  const std::size_t m = s.values.rows();
  if (eim.q() + extra > m) {
    throw contract_error("eim_then_stabilize: more sensors than grid points");
  }
  std::vector<std::size_t> sensors = eim.interp_indices;
  std::vector<double> history;
  extend_sensors_cond(eim.basis_h, s.grid_x.domain_measure, eim.q() + extra, sensors, history);
  return make_gappy_system(eim.basis_h, std::move(sensors), s.grid_x.domain_measure);
}

}  // namespace lowrank
