#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "geofair/errors.hpp"

namespace geofair {

/// Dense row-major matrix of doubles. The workhorse of the training stack;
/// sized for desk-scale batches, so everything stays in plain 64-bit floats.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  /// True when every entry is finite.
  bool all_finite() const;

  std::string shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// C = A * B. Throws ShapeError on mismatched inner dimensions.
Matrix matmul(const Matrix& a, const Matrix& b);

/// C = A^T * B (A is used transposed without materializing the transpose).
Matrix matmul_tn(const Matrix& a, const Matrix& b);

/// C = A * B^T.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

/// Adds `bias` to every row of `m` in place. bias.size() must equal m.cols().
void add_row_vector(Matrix& m, const std::vector<double>& bias);

/// Column sums of `m`, i.e. the gradient of a bias added to every row.
std::vector<double> column_sums(const Matrix& m);

}  // namespace geofair
