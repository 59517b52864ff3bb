#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lowrank/dense_matrix.hpp"

namespace lowrank {

// Strictly increasing sample points plus the measure of the underlying
// domain. The measure feeds the quadrature weight |domain| / #points used by
// every discrete scalar product; the point coordinates themselves are labels
// as far as the algorithms are concerned.
struct Grid {
  std::vector<double> points;
  double domain_measure = 1.0;

  Grid() = default;
  Grid(std::vector<double> pts, double measure);

  std::size_t size() const { return points.size(); }
};

// m equispaced points on [a, b] including the endpoints (midpoint when
// m == 1). Points are computed as ((m-1-i)*a + i*b)/(m-1), which keeps
// symmetric domains exactly symmetric in floating point.
Grid uniform_grid(double a, double b, std::size_t m);

// A deterministic bivariate evaluator f(x, y) with a descriptive tag.
struct BivariateSource {
  std::function<double(double, double)> f;
  std::string tag;

  double operator()(double x, double y) const { return f(x, y); }
};

struct TrivariateSource {
  std::function<double(double, double, double)> f;
  std::string tag;

  double operator()(double x, double y, double z) const { return f(x, y, z); }
};

// Snapshot values f(x_i, y_j) with their grids and the quadrature weight
// |domain_x| / m. The weight is a plain field so callers with externally
// normalized data can override it.
struct SnapshotMatrix {
  DenseMatrix values;  // m x n, rows follow grid_x
  Grid grid_x, grid_y;
  double weight = 1.0;

  SnapshotMatrix() = default;
  SnapshotMatrix(DenseMatrix vals, Grid gx, Grid gy);

  std::size_t rows() const { return values.rows(); }
  std::size_t cols() const { return values.cols(); }
};

SnapshotMatrix materialize(const BivariateSource& src, const Grid& gx, const Grid& gy);

// Parameters consumed by the built-in families; unused fields are ignored.
struct FamilyParams {
  double c = 1.0;                                // cauchy shift
  std::vector<std::vector<double>> g_coeffs;     // polynomial factors in x
  std::vector<std::vector<double>> h_coeffs;     // polynomial factors in y
};

// Named families: "product" g(x)h(y), "rank_k" sum of polynomial separable
// terms, "cauchy" 1/(x+y+c), "analytic" 1/(1+xy), "exp_abs" exp(-|x-y|).
BivariateSource builtin_family(const std::string& name, const FamilyParams& params = {});

// Seeded test instance: sum of `rank` random separable terms plus uniform
// noise of the given amplitude, on unit grids over [0,1].
SnapshotMatrix random_low_rank(std::size_t m, std::size_t n, std::size_t rank,
                               double noise, std::uint64_t seed);

// CSV persistence. Values are written in shortest round-trip decimal form;
// optional "#x:", "#y:" and "#measure:" header lines carry the grids. Files
// without headers get unit grids on [0,1].
SnapshotMatrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const SnapshotMatrix& s, const std::string& path);

// Dense trivariate samples on a grid triple, x-major storage.
struct Tensor3 {
  std::size_t nx = 0, ny = 0, nz = 0;
  std::vector<double> data;

  Tensor3() = default;
  Tensor3(std::size_t x, std::size_t y, std::size_t z)
      : nx(x), ny(y), nz(z), data(x * y * z, 0.0) {}

  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data[(i * ny + j) * nz + k];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data[(i * ny + j) * nz + k];
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data)
      if (v < 0.0 ? -v > m : v > m) m = (v < 0.0 ? -v : v);
    return m;
  }
};

struct TrivariateSample {
  Tensor3 values;
  Grid grid_x, grid_y, grid_z;
};

TrivariateSample materialize_trivariate(const TrivariateSource& src, const Grid& gx,
                                        const Grid& gy, const Grid& gz);

}  // namespace lowrank
