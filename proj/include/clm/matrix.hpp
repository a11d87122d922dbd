#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace clm {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles. Small utility type, not a full BLAS.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return data_[static_cast<size_t>(i) * cols_ + j];
  }
  double operator()(int i, int j) const {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return data_[static_cast<size_t>(i) * cols_ + j];
  }

  double* row_ptr(int i) { return data_.data() + static_cast<size_t>(i) * cols_; }
  const double* row_ptr(int i) const { return data_.data() + static_cast<size_t>(i) * cols_; }

  Vec& data() { return data_; }
  const Vec& data() const { return data_; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  bool is_symmetric(double tol = 0.0) const {
    if (rows_ != cols_) return false;
    for (int i = 0; i < rows_; ++i)
      for (int j = i + 1; j < cols_; ++j)
        if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
    return true;
  }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  int rows_, cols_;
  Vec data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);

// a * b^T without forming the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

Vec matvec(const Matrix& a, const Vec& x);

double frobenius_norm(const Matrix& a);
double frobenius_dist(const Matrix& a, const Matrix& b);

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);

}  // namespace clm
