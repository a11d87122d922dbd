#include "clm/symlin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "clm/errors.hpp"

namespace clm::symlin {

namespace {

void require_square_symmetric(const Matrix& s, const char* who) {
  if (s.rows() != s.cols()) throw DimensionMismatch(std::string(who) + ": matrix not square");
  if (!s.all_finite()) throw Error(std::string(who) + ": non-finite entries");
  double scale = 1.0;
  for (double v : s.data()) scale = std::max(scale, std::abs(v));
  // Products of the form Q S Q^T carry rounding-level asymmetry; only
  // genuinely lopsided input is rejected.
  const double tol = 1e-9 * scale;
  for (int i = 0; i < s.rows(); ++i)
    for (int j = i + 1; j < s.cols(); ++j)
      if (std::abs(s(i, j) - s(j, i)) > tol)
        throw Error(std::string(who) + ": matrix not symmetric");
}

// Relative floor below which eigenvalues are clamped before log/power.
constexpr double kEigClampRel = 1e-12;

Vec clamped_positive_eigenvalues(const SpectralDecomposition& d, const char* who) {
  const double lam_max = d.eigenvalues.empty() ? 0.0 : d.eigenvalues.front();
  if (lam_max <= 0.0) throw NotPositiveDefinite(std::string(who) + ": matrix not positive definite");
  Vec lam = d.eigenvalues;
  const double floor_val = kEigClampRel * lam_max;
  for (double& v : lam) v = std::max(v, floor_val);
  return lam;
}

}  // namespace

Matrix cholesky_lower(const Matrix& sigma) {
  require_square_symmetric(sigma, "cholesky_lower");
  const int n = sigma.rows();
  Matrix p(n, n);
  for (int j = 0; j < n; ++j) {
    double diag = sigma(j, j);
    for (int k = 0; k < j; ++k) diag -= p(j, k) * p(j, k);
    if (diag <= 0.0)
      throw NotPositiveDefinite("cholesky_lower: pivot <= 0 at column " + std::to_string(j));
    p(j, j) = std::sqrt(diag);
    for (int i = j + 1; i < n; ++i) {
      double s = sigma(i, j);
      for (int k = 0; k < j; ++k) s -= p(i, k) * p(j, k);
      p(i, j) = s / p(j, j);
    }
  }
  return p;
}

SpectralDecomposition sym_eig(const Matrix& s) {
  require_square_symmetric(s, "sym_eig");
  const int n = s.rows();
  Matrix a = s;
  // Work on the exactly symmetric part.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double m = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = m;
      a(j, i) = m;
    }
  // Eigenvectors are accumulated transposed (rows, not columns) so the
  // rotation updates below run over contiguous memory.
  Matrix vt = Matrix::identity(n);

  double frob = frobenius_norm(a);
  const double stop = 1e-14 * std::max(frob, 1.0);
  const int max_sweeps = 100;

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double off = 0.0, abs_sum = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        off += a(p, q) * a(p, q);
        abs_sum += std::abs(a(p, q));
      }
    off = std::sqrt(2.0 * off);
    if (off <= stop) break;
    // Rotation threshold for the first sweeps: concentrating on the
    // large elements first saves whole sweeps at the end.
    const double tresh =
        sweep < 4 ? 0.2 * abs_sum / (static_cast<double>(n) * n) : 1e-3 * stop / n;

    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Negligible relative to its diagonal: zero it outright.
        const double g100 = 100.0 * std::abs(apq);
        if (sweep >= 4 && std::abs(app) + g100 == std::abs(app) &&
            std::abs(aqq) + g100 == std::abs(aqq)) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        if (std::abs(apq) <= tresh) continue;
        // Rotation angle per the standard Jacobi recurrence.
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e300) {
          t = 1.0 / (2.0 * theta);
        } else {
          t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        const double tau = sn / (1.0 + c);

        // Rows p and q hold the current columns p and q by symmetry, so
        // the bulk update is a branch-free pass over two contiguous rows;
        // the 2x2 pivot block is patched afterwards and the columns are
        // refreshed from the rows in a second pass.
        double* __restrict rp = a.row_ptr(p);
        double* __restrict rq = a.row_ptr(q);
        for (int i = 0; i < n; ++i) {
          const double aip = rp[i];
          const double aiq = rq[i];
          rp[i] = aip - sn * (aiq + tau * aip);
          rq[i] = aiq + sn * (aip - tau * aiq);
        }
        rp[p] = app - t * apq;
        rq[q] = aqq + t * apq;
        rp[q] = 0.0;
        rq[p] = 0.0;
        for (int i = 0; i < n; ++i) {
          a(i, p) = rp[i];
          a(i, q) = rq[i];
        }
        double* __restrict vp = vt.row_ptr(p);
        double* __restrict vq = vt.row_ptr(q);
        for (int i = 0; i < n; ++i) {
          const double vip = vp[i];
          const double viq = vq[i];
          vp[i] = vip - sn * (viq + tau * vip);
          vq[i] = viq + sn * (vip - tau * viq);
        }
      }
    }
  }
  if (sweep >= max_sweeps)
    throw ConvergenceFailure("sym_eig: Jacobi did not converge in 100 sweeps");

  // Sort descending, keep eigenvector columns aligned.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return a(i, i) > a(j, j); });

  SpectralDecomposition d;
  d.eigenvalues.resize(n);
  d.eigenvectors = Matrix(n, n);
  for (int j = 0; j < n; ++j) {
    const int src = order[j];
    d.eigenvalues[j] = a(src, src);
    // Sign convention: first nonzero component positive.
    const double* row = vt.row_ptr(src);
    double sign = 1.0;
    for (int i = 0; i < n; ++i) {
      if (std::abs(row[i]) > 1e-12) {
        sign = row[i] > 0 ? 1.0 : -1.0;
        break;
      }
    }
    for (int i = 0; i < n; ++i) d.eigenvectors(i, j) = sign * row[i];
  }
  return d;
}

Matrix spectral_reconstruct(const SpectralDecomposition& d) {
  const int n = d.eigenvectors.rows();
  Matrix out(n, n);
  for (int j = 0; j < n; ++j) {
    const double lam = d.eigenvalues[j];
    if (lam == 0.0) continue;
    for (int i = 0; i < n; ++i) {
      const double uij = d.eigenvectors(i, j) * lam;
      if (uij == 0.0) continue;
      for (int k = i; k < n; ++k) out(i, k) += uij * d.eigenvectors(k, j);
    }
  }
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < i; ++k) out(i, k) = out(k, i);
  return out;
}

namespace {

Matrix spectral_map(const Matrix& s, double (*fn)(double), const char* who) {
  SpectralDecomposition d = sym_eig(s);
  Vec lam = clamped_positive_eigenvalues(d, who);
  for (double& v : lam) v = fn(v);
  SpectralDecomposition mapped{d.eigenvectors, lam};
  return spectral_reconstruct(mapped);
}

}  // namespace

Matrix spd_power(const Matrix& s, double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw InvalidRho("spd_power: rho must lie in (0, 1]");
  if (rho == 1.0) return s;
  SpectralDecomposition d = sym_eig(s);
  Vec lam = clamped_positive_eigenvalues(d, "spd_power");
  for (double& v : lam) v = std::pow(v, rho);
  SpectralDecomposition mapped{d.eigenvectors, lam};
  return spectral_reconstruct(mapped);
}

Matrix spd_log(const Matrix& s) {
  return spectral_map(s, [](double x) { return std::log(x); }, "spd_log");
}

Matrix spd_exp(const Matrix& g) {
  SpectralDecomposition d = sym_eig(g);
  Vec lam = d.eigenvalues;
  for (double& v : lam) v = std::exp(v);
  SpectralDecomposition mapped{d.eigenvectors, lam};
  return spectral_reconstruct(mapped);
}

Vec half_vectorize(const Matrix& g) {
  require_square_symmetric(g, "half_vectorize");
  const int n = g.rows();
  const double sqrt2 = std::sqrt(2.0);
  Vec f;
  f.reserve(vec_len(n));
  for (int i = 0; i < n; ++i) {
    f.push_back(g(i, i));
    for (int j = i + 1; j < n; ++j) f.push_back(sqrt2 * g(i, j));
  }
  return f;
}

Matrix half_unvectorize(const Vec& f, int dim) {
  if (static_cast<int>(f.size()) != vec_len(dim))
    throw DimensionMismatch("half_unvectorize: length " + std::to_string(f.size()) +
                            " does not match dim " + std::to_string(dim));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Matrix g(dim, dim);
  size_t idx = 0;
  for (int i = 0; i < dim; ++i) {
    g(i, i) = f[idx++];
    for (int j = i + 1; j < dim; ++j) {
      const double v = f[idx++] * inv_sqrt2;
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

}  // namespace clm::symlin
