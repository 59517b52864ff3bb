#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lowrank/errors.hpp"

namespace lowrank {

// Row-major dense float64 matrix. Deliberately minimal: the algorithms in
// this library are written against raw loops, so only the handful of helpers
// they actually share live here.
class DenseMatrix {
 public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw contract_error("DenseMatrix: buffer size does not match rows*cols");
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  std::vector<double> row(std::size_t i) const {
    return std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                               data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
  }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  DenseMatrix transposed() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  DenseMatrix multiply(const DenseMatrix& rhs) const {
    if (cols_ != rhs.rows_)
      throw contract_error("DenseMatrix::multiply: inner dimensions differ");
    DenseMatrix out(rows_, rhs.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < cols_; ++k) {
        const double a = (*this)(i, k);
        if (a == 0.0) continue;
        for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j) += a * rhs(k, j);
      }
    return out;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_)
      if (std::abs(v) > m) m = std::abs(v);
    return m;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }

  // All entries are required to be finite; call sites that ingest external
  // data use this to fail early with a useful context string.
  void require_finite(const std::string& context) const {
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        if (!std::isfinite((*this)(i, j)))
          throw numeric_error(context + ": non-finite entry at (" + std::to_string(i) +
                              ", " + std::to_string(j) + ")");
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

}  // namespace lowrank
