#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "lowrank/dense_matrix.hpp"
#include "lowrank/functional.hpp"
#include "lowrank/sampling.hpp"

namespace lowrank {

// Pivots whose magnitude drops below this fraction of the initial level are
// treated as numerical rank exhaustion, not as usable elimination steps.
inline constexpr double kPivotFloorRel = 1e-14;

inline constexpr std::size_t kNoRankCap = std::numeric_limits<std::size_t>::max();

enum class AcaStatus {
  converged,       // stopping tolerance reached
  rank_exhausted,  // no pivot above the numerical floor remained
  rank_capped,     // stopped by the caller-imposed rank limit
};

const char* to_string(AcaStatus status);

// One elimination term, fl(v_j * fl(u_i / pivot)). Every cross variant and
// the greedy interpolation routines funnel their updates through this exact
// expression so that equivalent pivot choices reproduce each other bitwise.
inline double cross_term(double u_i, double v_j, double pivot) {
  return v_j * (u_i / pivot);
}

// Rank-Q cross data: row indices tau, column indices sigma, the residual
// columns u_q and rows v_q they were built from, and the pivots (v_q)_{j_q}.
// The approximation they describe is sum_q u_q v_q^T / pivot_q.
struct CrossApproximation {
  std::vector<std::size_t> tau;
  std::vector<std::size_t> sigma;
  std::vector<std::vector<double>> u_vectors;  // each of length rows
  std::vector<std::vector<double>> v_vectors;  // each of length cols
  std::vector<double> pivot_values;
  std::vector<double> indicator_history;  // stopping quantity per iteration
  AcaStatus status = AcaStatus::converged;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t rank() const { return tau.size(); }
};

// sum_q u_q v_q^T / pivot_q as a dense matrix.
DenseMatrix reconstruct(const CrossApproximation& ca);

enum class PivotRule {
  global,   // (i, j) maximizing |remainder|, column-first first-max scan
  partial,  // row from the previous column's maximum, then the row's maximum
};

struct Aca2Result {
  CrossApproximation cross;
  // remainder_history[q] is the remainder after q steps; [0] is the input.
  std::vector<DenseMatrix> remainder_history;

  const DenseMatrix& remainder() const { return remainder_history.back(); }
};

// Bivariate cross approximation on a fully materialized snapshot matrix.
// Stops once max|remainder| < tol (that value is appended per iteration to
// indicator_history, so it has rank()+1 entries).
Aca2Result aca2_bivariate(const SnapshotMatrix& s, double tol, PivotRule rule,
                          std::size_t max_rank = kNoRankCap);

enum class RowRule { cyclic, random, node_based, given };

struct RowRuleSpec {
  RowRule rule = RowRule::cyclic;
  std::uint64_t seed = 0;                 // random
  std::vector<std::size_t> given_rows;    // given, consumed in order
  Grid row_grid;                          // node_based: monomial nodes here

  static RowRuleSpec cyclic() { return {}; }
  static RowRuleSpec randomized(std::uint64_t seed);
  static RowRuleSpec node_based(Grid grid);
  static RowRuleSpec given(std::vector<std::size_t> rows);
};

using EntryProvider = std::function<double(std::size_t, std::size_t)>;

// Partial-pivot cross approximation that touches only the selected rows and
// columns of the matrix (never materializes remainders). Stops when the
// cheap indicator ||u||_2 ||v||_2 / |pivot| of the freshly computed candidate
// drops below tol; that candidate is then discarded, so on convergence
// indicator_history has rank()+1 entries.
CrossApproximation aca_matrix(const EntryProvider& entry, std::size_t rows,
                              std::size_t cols, double tol, const RowRuleSpec& rule,
                              std::size_t max_rank = kNoRankCap);

// Interpolation form of a cross: evaluates
//   [f(x, y_sigma)] M^{-1} [f(x_tau, y)]
// through the implicit unit-lower/upper factors of the cross matrix M, which
// the elimination provides for free (no inverse is ever formed).
struct CrossInterpolant {
  std::vector<std::size_t> tau;
  std::vector<std::size_t> sigma;
  DenseMatrix lower;  // unit lower triangular, L(p,q) = u_q[tau_p] / pivot_q
  DenseMatrix upper;  // upper triangular, U(q,p) = v_q[sigma_p]

  // row_values[p] = f(x, y_{sigma_p}); col_values[p] = f(x_{tau_p}, y).
  double evaluate(const std::vector<double>& row_values,
                  const std::vector<double>& col_values) const;
};

CrossInterpolant cross_interpolant(const CrossApproximation& ca);

// Interpolant values on the full grid of a materialized matrix.
DenseMatrix interpolant_matrix(const CrossApproximation& ca, const DenseMatrix& a);

// Interpolation nodes generalizing Leja points: ell_q vanishes at all earlier
// nodes and x_q maximizes |ell_q| over the grid.
struct NodeSystem {
  std::vector<std::size_t> nodes;                  // grid indices x_1..x_Q
  std::vector<std::vector<double>> ell_functions;  // values of ell_q on the grid
  std::string basis_tag;
};

// w_k(x) = x^k for k = 0..count-1, built by iterated multiplication.
std::vector<std::vector<double>> monomial_basis(const Grid& grid, std::size_t count);

NodeSystem build_nodes(const std::vector<std::vector<double>>& basis_w, const Grid& grid,
                       const std::string& basis_tag = "custom");

// sup over grid-y of || M^{-1} [f(x_tau, y)] ||_1, the stability factor of the
// cross interpolant with respect to y.
double sigma2(const SnapshotMatrix& s, const std::vector<std::size_t>& tau,
              const std::vector<std::size_t>& sigma);

// Same quantity with the roles of x and y swapped (transpose solve).
double sigma1(const SnapshotMatrix& s, const std::vector<std::size_t>& tau,
              const std::vector<std::size_t>& sigma);

// Exhaustive check that |det M| dominates |det M_q(y)| for every position q
// and every grid column y (column replacement only, per the defining
// condition). Brute force, so the rank is capped.
struct MaxVolumeReport {
  double max_ratio = 0.0;     // worst |det M_q(y)| / |det M|
  bool holds = false;         // max_ratio <= 1 + 1e-12 and not singular
  bool singular = false;      // det M numerically zero
  std::size_t worst_position = 0;  // q of the worst ratio
  std::size_t worst_column = 0;    // grid column of the worst ratio
};

MaxVolumeReport max_volume_check(const DenseMatrix& a, const std::vector<std::size_t>& tau,
                                 const std::vector<std::size_t>& sigma);

// Cross elimination driven by dictionaries of linear functionals instead of
// point evaluations; tau/sigma index into the dictionaries. With Dirac
// dictionaries in grid order this reduces bitwise to aca2_bivariate with
// global pivoting.
struct FunctionalCross {
  CrossApproximation cross;
  DenseMatrix remainder;
};

FunctionalCross aca_functional(const SnapshotMatrix& s, const std::vector<Functional>& phis,
                               const std::vector<Functional>& psis, double tol,
                               std::size_t max_rank = kNoRankCap);

// Equi-directional trivariate elimination. Each step subtracts
//   r(x,y,z_q) r(x,y_q,z) r(x_q,y,z) r(x_q,y_q,z_q)
//   -----------------------------------------------
//   r(x,y_q,z_q) r(x_q,y,z_q) r(x_q,y_q,z)
// which annihilates the three pivot planes; points where the denominator
// vanishes numerically are treated as already annihilated (term 0).
struct TrivariatePivot {
  std::size_t i = 0, j = 0, k = 0;
};

struct TrivariateCross {
  std::vector<TrivariatePivot> pivots;
  std::vector<double> pivot_values;
  std::vector<double> indicator_history;  // max|remainder| per iteration
  std::vector<Tensor3> remainder_history;  // [q] = remainder after q steps
  AcaStatus status = AcaStatus::converged;

  std::size_t rank() const { return pivots.size(); }
  const Tensor3& remainder() const { return remainder_history.back(); }
};

TrivariateCross aca_trivariate(const TrivariateSample& t, double tol,
                               std::size_t max_rank = kNoRankCap);

}  // namespace lowrank
