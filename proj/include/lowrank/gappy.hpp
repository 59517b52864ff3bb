#pragma once

#include <cstddef>
#include <vector>

#include "lowrank/dense_matrix.hpp"
#include "lowrank/eim.hpp"
#include "lowrank/functional.hpp"
#include "lowrank/sampling.hpp"

namespace lowrank {

enum class GappyMode { nodal, generalized };

// Projection data from incomplete ("gappy") measurements: a basis over the
// full grid plus the sensors (grid points, or functionals in generalized
// mode) where data is available. gram holds the basis Gram matrix in the
// sensor scalar product (measure/L) * sum over sensors.
struct GappySystem {
  std::vector<std::vector<double>> basis_h;  // Q vectors over the x grid
  std::vector<std::size_t> sensors;          // L distinct grid indices (nodal)
  std::vector<Functional> functionals;       // L degrees of freedom (generalized)
  DenseMatrix gram;
  double gram_cond = 0.0;  // spectral condition number; +inf when singular
  GappyMode mode = GappyMode::nodal;
  DenseMatrix gen_gram_g;  // (phi_l, phi_k) table backing the generalized product
  double measure = 1.0;    // |Omega_x|
  std::size_t dof_count = 0;  // M, the total number of degrees of freedom

  std::size_t q() const { return basis_h.size(); }
  std::size_t sensor_count() const {
    return mode == GappyMode::nodal ? sensors.size() : functionals.size();
  }
};

// (measure/L) * sum over sensors of h_j h_i; the basis Gram in the sensor
// scalar product.
DenseMatrix gappy_gram(const std::vector<std::vector<double>>& basis_h,
                       const std::vector<std::size_t>& sensors, double measure);

GappySystem make_gappy_system(std::vector<std::vector<double>> basis_h,
                              std::vector<std::size_t> sensors, double measure);

GappySystem make_generalized_system(std::vector<std::vector<double>> basis_h,
                                    std::vector<Functional> functionals, DenseMatrix g,
                                    double measure);

struct GappyProjection {
  std::vector<double> coefficients;
  std::vector<double> values;  // reconstruction over the full grid
};

// Least-squares fit of the basis to the sensor data (the normal equations of
// the sensor scalar product). In nodal mode f_at_sensors holds point values
// at the sensors, in generalized mode the measured degrees of freedom.
GappyProjection gappy_project(const GappySystem& sys,
                              const std::vector<double>& f_at_sensors);

// Coefficients fitting the measured degrees of freedom dofs_of_f in the
// scalar product induced by the functionals and the table g of their basis
// functions' mutual scalar products. The common M/L prefactor of that
// product scales both sides of the normal equations and is omitted.
std::vector<double> gappy_generalized_project(
    const std::vector<std::vector<double>>& basis_h,
    const std::vector<Functional>& functionals, const DenseMatrix& g,
    const std::vector<double>& dofs_of_f);

struct SensorPlacement {
  std::vector<std::size_t> sensors;
  // Per accepted sensor: the condition number of its Gram (condition-number
  // criterion), or the worst-column error before placing it plus one final
  // entry (error criterion).
  std::vector<double> history;
};

// Greedy condition-number placement: each step scans all unused grid points
// and keeps the first minimizer of the spectral condition number of the
// Gram built from min(Q, l) leading basis functions. The 1x1 first step is
// degenerate (every nonzero point gives condition 1), so the first sensor is
// the first maximizer of |h_1| instead.
SensorPlacement place_sensors_cond(const std::vector<std::vector<double>>& basis_h,
                                   const Grid& grid, std::size_t count);

// Greedy worst-residual placement: each step projects every training column
// from the sensors placed so far (using min(Q, l-1) leading basis
// functions), finds the worst column in the p-norm, and places the next
// sensor at its largest residual entry. Candidate points whose would-be Gram
// is singular are skipped.
SensorPlacement place_sensors_error(const std::vector<std::vector<double>>& basis_h,
                                    const SnapshotMatrix& s, std::size_t count, PNorm p);

// Greedy basis/point construction followed by condition-number stabilization:
// seeds the sensors with the interpolation points and appends `extra` more
// by continuing the condition-number greedy over the full basis.
GappySystem eim_then_stabilize(const SnapshotMatrix& s, double tol, std::size_t extra,
                               PNorm p);

}  // namespace lowrank
