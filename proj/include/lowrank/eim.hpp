#pragma once

#include <cstddef>
#include <vector>

#include "lowrank/aca.hpp"
#include "lowrank/dense_matrix.hpp"
#include "lowrank/functional.hpp"
#include "lowrank/sampling.hpp"

namespace lowrank {

// Norm over the x-grid used to rank training columns. The 1- and 2-norms are
// weighted with the grid's quadrature weight; the max norm is unweighted.
enum class PNorm { one, two, inf };

const char* to_string(PNorm p);

// Greedy interpolation system over a snapshot matrix: training columns j_q,
// interpolation rows i_q, basis vectors h_q normalized so h_q(x_q) = 1, plus
// everything needed to interpolate new data and to rebuild the basis off-grid.
struct EimSystem {
  std::vector<std::size_t> sample_indices;     // selected training columns j_q
  std::vector<std::size_t> interp_indices;     // selected grid rows i_q
  std::vector<std::vector<double>> basis_h;    // h_q over grid_x, h_q(x_q) = 1
  DenseMatrix b;                // b(k,l) = h_{l+1}(x_{k+1}); unit diagonal
  DenseMatrix recovery_s;       // s(q,l): interpolation data of column j_{q+1}
  DenseMatrix training_coeffs;  // (q, j): coefficient of h_{q+1} for column j
  std::vector<double> err_history;  // sup over columns of the residual norm
  PNorm norm_p = PNorm::inf;
  double weight = 1.0;
  Grid grid_x, grid_y;
  AcaStatus status = AcaStatus::converged;

  std::size_t q() const { return interp_indices.size(); }
};

// Greedy selection: the worst-approximated training column in the p-norm,
// then the row of largest residual inside it. Stops once the worst norm
// drops below tol (that value is appended per iteration to err_history).
// With p = inf the picks coincide bitwise with aca2_bivariate global pivoting.
EimSystem eim_greedy(const SnapshotMatrix& s, double tol, PNorm p,
                     std::size_t max_rank = kNoRankCap);

struct EimInterpolation {
  std::vector<double> coefficients;  // g_1..g_Q
  std::vector<double> values;        // interpolant on the full x-grid
};

// Forward substitution through the unit-lower interpolation system; the
// result matches f at every selected row.
EimInterpolation eim_interpolate(const EimSystem& sys, const std::vector<double>& f);

// Continuous recovery of the basis: h_q(x) = (f(x, y_q) - sum s_{q,l} h_l(x))
// / s_{q,q}, evaluable at any x the source accepts.
class EimContinuousBasis {
 public:
  EimContinuousBasis(const EimSystem& sys, BivariateSource src);

  // Values h_1(x)..h_Q(x).
  std::vector<double> basis_at(double x) const;

 private:
  std::vector<double> sample_y_;
  DenseMatrix s_;
  BivariateSource src_;
};

EimContinuousBasis eim_continuous_recover(const EimSystem& sys, const BivariateSource& src);

// Lebesgue constants Lambda_1..Lambda_{up_to_q}: the max over grid rows of
// the l1 norm of the Lagrange-function values, obtained by solving B^T
// systems per row. Generic form for any greedy basis/B pair.
std::vector<double> lebesgue_constants(const std::vector<std::vector<double>>& basis_h,
                                       const DenseMatrix& b, std::size_t up_to_q);
std::vector<double> lebesgue_constants(const EimSystem& sys, std::size_t up_to_q);

// Interpolation rows + triangular system for a preexisting ordered basis
// (POD modes, monomials, ...). Reuses the node elimination, so monomials on
// a symmetric grid reproduce the classical point sequence.
struct PointSelection {
  std::vector<std::size_t> interp_indices;
  std::vector<std::vector<double>> basis_h;  // normalized: h_q(x_q) = 1
  DenseMatrix b;
};

PointSelection eim_points_for_basis(const std::vector<std::vector<double>>& basis_w,
                                    const Grid& grid);

// Generalized variant: interpolation conditions are moments from a
// dictionary of functionals instead of point evaluations.
struct GeimSystem {
  std::vector<std::size_t> sample_indices;  // selected training columns
  std::vector<std::size_t> moment_indices;  // selected dictionary entries
  std::vector<std::vector<double>> basis_h;
  DenseMatrix b;  // b(k,l) = sigma_k(h_l); diagonal stored as exact 1
  std::vector<double> err_history;
  PNorm norm_p = PNorm::inf;
  AcaStatus status = AcaStatus::converged;

  std::size_t q() const { return moment_indices.size(); }
};

GeimSystem geim_greedy(const SnapshotMatrix& s, const std::vector<Functional>& dictionary,
                       double tol, PNorm p, std::size_t max_rank = kNoRankCap);

EimInterpolation geim_interpolate(const GeimSystem& sys,
                                  const std::vector<Functional>& dictionary,
                                  const std::vector<double>& f);

}  // namespace lowrank
