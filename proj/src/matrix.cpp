#include "clm/matrix.hpp"

#include "clm/errors.hpp"

namespace clm {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    double* ci = c.row_ptr(i);
    const double* ai = a.row_ptr(i);
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = ai[k];
      if (aik == 0.0) continue;
      const double* bk = b.row_ptr(k);
      for (int j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw DimensionMismatch("matmul_nt: inner dimensions differ");
  Matrix c(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i) {
    const double* ai = a.row_ptr(i);
    for (int j = 0; j < b.rows(); ++j) {
      const double* bj = b.row_ptr(j);
      double s = 0.0;
      for (int k = 0; k < a.cols(); ++k) s += ai[k] * bj[k];
      c(i, j) = s;
    }
  }
  return c;
}

Vec matvec(const Matrix& a, const Vec& x) {
  if (static_cast<size_t>(a.cols()) != x.size())
    throw DimensionMismatch("matvec: dimensions differ");
  Vec y(a.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    const double* ai = a.row_ptr(i);
    double s = 0.0;
    for (int k = 0; k < a.cols(); ++k) s += ai[k] * x[k];
    y[i] = s;
  }
  return y;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

double frobenius_dist(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("frobenius_dist: shapes differ");
  double s = 0.0;
  for (size_t i = 0; i < a.data().size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double dot(const Vec& a, const Vec& b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

}  // namespace clm
