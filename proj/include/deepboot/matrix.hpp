#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "deepboot/error.hpp"

namespace deepboot {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw ShapeError("matrix data length " + std::to_string(data_.size()) + " != " +
                       std::to_string(rows_) + "x" + std::to_string(cols_));
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> flat() noexcept { return data_; }
  std::span<const double> flat() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  // Rows [begin, begin + count) as a new matrix.
  Matrix slice_rows(std::size_t begin, std::size_t count) const {
    if (begin + count > rows_) throw ShapeError("row slice out of range");
    return Matrix(count, cols_,
                  std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(begin * cols_),
                                      data_.begin() + static_cast<std::ptrdiff_t>((begin + count) * cols_)));
  }

  bool all_finite() const noexcept {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

namespace linalg {

// out[j] += a * x[j]
inline void axpy(double a, std::span<const double> x, std::span<double> out) noexcept {
  const std::size_t n = out.size();
  const double* xs = x.data();
  double* os = out.data();
  for (std::size_t j = 0; j < n; ++j) os[j] += a * xs[j];
}

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// A * B^T, where A is (n x k) and B is (m x k). Accumulates with axpy over a
// transposed copy of B so the inner loop is contiguous.
inline Matrix matmul_bt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_bt: inner dims " + std::to_string(a.cols()) + " vs " +
                     std::to_string(b.cols()));
  }
  const Matrix bt = b.transposed();
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    auto arow = a.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double v = arow[k];
      if (v != 0.0) axpy(v, bt.row(k), orow);
    }
  }
  return out;
}

// A^T * B, where A is (n x m) and B is (n x k); result (m x k).
inline Matrix matmul_at(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ShapeError("matmul_at: row counts differ");
  Matrix out(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto arow = a.row(i);
    auto brow = b.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double v = arow[j];
      if (v != 0.0) axpy(v, brow, out.row(j));
    }
  }
  return out;
}

// A * B, where A is (n x k) and B is (k x m).
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dims differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    auto arow = a.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double v = arow[k];
      if (v != 0.0) axpy(v, b.row(k), orow);
    }
  }
  return out;
}

}  // namespace linalg
}  // namespace deepboot
