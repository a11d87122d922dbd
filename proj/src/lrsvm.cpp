#include "clm/lrsvm.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "clm/errors.hpp"
#include "clm/symlin.hpp"

namespace clm::lrsvm {

namespace {

// Orthogonalizes candidate against the first `filled` columns of L and
// appends it when the residual is non-negligible. Returns success.
bool append_orthogonalized(Matrix& L, int filled, const Vec& candidate) {
  const int d = L.rows();
  Vec v = candidate;
  // Two passes of Gram-Schmidt keep the basis orthonormal to 1e-12.
  for (int pass = 0; pass < 2; ++pass) {
    for (int j = 0; j < filled; ++j) {
      double proj = 0.0;
      for (int i = 0; i < d; ++i) proj += v[i] * L(i, j);
      for (int i = 0; i < d; ++i) v[i] -= proj * L(i, j);
    }
  }
  const double n = norm2(v);
  if (n < 1e-8) return false;
  for (int i = 0; i < d; ++i) L(i, filled) = v[i] / n;
  return true;
}

// Fills columns [filled, r) from prev columns then canonical vectors.
void complete_basis(Matrix& L, int filled, const Matrix* prev_block) {
  const int d = L.rows();
  const int r = L.cols();
  if (prev_block) {
    for (int j = 0; j < prev_block->cols() && filled < r; ++j) {
      Vec cand(d);
      for (int i = 0; i < d; ++i) cand[i] = (*prev_block)(i, j);
      if (append_orthogonalized(L, filled, cand)) ++filled;
    }
  }
  for (int e = 0; e < d && filled < r; ++e) {
    Vec cand(d, 0.0);
    cand[e] = 1.0;
    if (append_orthogonalized(L, filled, cand)) ++filled;
  }
  if (filled < r) throw Error("projection basis completion failed");
}

}  // namespace

int TrainingSet::num_classes() const {
  int m = 0;
  for (int l : labels) m = std::max(m, l);
  return m;
}

void TrainingSet::validate() const {
  if (count() < 2) throw Error("training set: need at least 2 samples");
  if (static_cast<int>(labels.size()) != count())
    throw DimensionMismatch("training set: label count mismatch");
  if (num_blocks * block_dim != feature_dim())
    throw DimensionMismatch("training set: B*d != D");
  const int m = num_classes();
  std::set<int> seen(labels.begin(), labels.end());
  for (int c = 1; c <= m; ++c)
    if (!seen.count(c)) throw Error("training set: labels not dense in [1, M]");
  if (*seen.begin() < 1) throw Error("training set: labels must start at 1");
}

BlockProjection pca_init(const TrainingSet& ts, int r) {
  ts.validate();
  const int n = ts.count();
  const int d = ts.block_dim;
  if (r < 1 || r > std::min(d, n)) throw RankTooLarge("pca_init: r outside [1, min(d, N)]");

  BlockProjection proj;
  proj.rank = r;
  proj.block_dim = d;
  proj.blocks.reserve(ts.num_blocks);

  for (int b = 0; b < ts.num_blocks; ++b) {
    const int off = b * d;
    // Centered block slice.
    Vec mean(d, 0.0);
    for (int i = 0; i < n; ++i) {
      const double* row = ts.features.row_ptr(i) + off;
      for (int c = 0; c < d; ++c) mean[c] += row[c];
    }
    for (double& v : mean) v /= n;

    Matrix L(d, r);
    int filled = 0;
    if (d <= n) {
      Matrix cov(d, d);
      for (int i = 0; i < n; ++i) {
        const double* row = ts.features.row_ptr(i) + off;
        for (int a = 0; a < d; ++a) {
          const double da = row[a] - mean[a];
          for (int c = a; c < d; ++c) cov(a, c) += da * (row[c] - mean[c]);
        }
      }
      for (int a = 0; a < d; ++a)
        for (int c = 0; c < a; ++c) cov(a, c) = cov(c, a);
      const auto eig = symlin::sym_eig(cov);
      for (int j = 0; j < r; ++j)
        for (int i = 0; i < d; ++i) L(i, j) = eig.eigenvectors(i, j);
      filled = r;
    } else {
      // Gram trick: eigenvectors of X_c X_c^T mapped back through X_c^T.
      Matrix xc(n, d);
      for (int i = 0; i < n; ++i) {
        const double* row = ts.features.row_ptr(i) + off;
        for (int c = 0; c < d; ++c) xc(i, c) = row[c] - mean[c];
      }
      const Matrix gram = matmul_nt(xc, xc);
      const auto eig = symlin::sym_eig(gram);
      const double lam_max = std::max(eig.eigenvalues.front(), 0.0);
      for (int j = 0; j < std::min(r, n) && eig.eigenvalues[j] > 1e-10 * lam_max; ++j) {
        Vec u(d, 0.0);
        const double inv = 1.0 / std::sqrt(eig.eigenvalues[j]);
        for (int i = 0; i < n; ++i) {
          const double vij = eig.eigenvectors(i, j);
          if (vij == 0.0) continue;
          const double* row = xc.row_ptr(i);
          for (int c = 0; c < d; ++c) u[c] += vij * row[c];
        }
        for (double& v : u) v *= inv;
        if (append_orthogonalized(L, filled, u)) ++filled;
      }
      complete_basis(L, filled, nullptr);
      filled = r;
    }
    proj.blocks.push_back(std::move(L));
  }
  return proj;
}

SvmClassSolution svm_solve_dual(const Matrix& x, const std::vector<int>& labels, double C,
                                const Vec* warm, double tol, long max_pair_updates) {
  const int n = x.rows();
  const int p = x.cols();
  if (!(C > 0.0)) throw Error("svm_solve_dual: C must be positive");
  if (static_cast<int>(labels.size()) != n)
    throw DimensionMismatch("svm_solve_dual: label count mismatch");
  bool has_pos = false, has_neg = false;
  for (int y : labels) {
    if (y == 1) has_pos = true;
    else if (y == -1) has_neg = true;
    else throw Error("svm_solve_dual: labels must be +/-1");
  }
  if (!has_pos || !has_neg) throw Error("svm_solve_dual: both classes must be present");
  if (max_pair_updates < 0) max_pair_updates = std::max<long>(100000, 2000L * n);

  SvmClassSolution sol;
  sol.alpha.assign(n, 0.0);
  if (warm) {
    if (static_cast<int>(warm->size()) != n)
      throw DimensionMismatch("svm_solve_dual: warm start size mismatch");
    sol.alpha = *warm;
  }

  // w = sum alpha_i y_i x_i; f_i = w . x_i kept incrementally.
  Vec w(p, 0.0);
  for (int i = 0; i < n; ++i) {
    const double ay = sol.alpha[i] * labels[i];
    if (ay == 0.0) continue;
    const double* xi = x.row_ptr(i);
    for (int c = 0; c < p; ++c) w[c] += ay * xi[c];
  }
  Vec f(n);
  for (int i = 0; i < n; ++i) {
    const double* xi = x.row_ptr(i);
    double s = 0.0;
    for (int c = 0; c < p; ++c) s += w[c] * xi[c];
    f[i] = s;
  }
  Vec diag(n);
  for (int i = 0; i < n; ++i) {
    const double* xi = x.row_ptr(i);
    double s = 0.0;
    for (int c = 0; c < p; ++c) s += xi[c] * xi[c];
    diag[i] = s;
  }

  long updates = 0;
  double gap = 0.0;
  for (;; ++updates) {
    // First index: maximal violation over I_up. The stopping gap is the
    // classic m_up - m_low criterion.
    int i_up = -1, i_low = -1;
    double m_up = -1e300, m_low = 1e300;
    std::vector<double> viol(n);
    for (int t = 0; t < n; ++t) {
      const double grad = labels[t] * f[t] - 1.0;  // dDual/dalpha_t
      const double v = -labels[t] * grad;
      viol[t] = v;
      const bool in_up = (labels[t] == 1) ? sol.alpha[t] < C : sol.alpha[t] > 0.0;
      const bool in_low = (labels[t] == 1) ? sol.alpha[t] > 0.0 : sol.alpha[t] < C;
      if (in_up && v > m_up) {
        m_up = v;
        i_up = t;
      }
      if (in_low && v < m_low) {
        m_low = v;
        i_low = t;
      }
    }
    gap = m_up - m_low;
    if (gap < tol) break;
    if (updates >= max_pair_updates)
      throw NoConvergence("svm_solve_dual: pair-update cap reached (gap " +
                          std::to_string(gap) + ")");

    // Second index: maximal gain (second-order working-set selection).
    const double* xu = x.row_ptr(i_up);
    int j_best = i_low;
    double best_gain = -1.0, eta_best = 1e-12;
    for (int t = 0; t < n; ++t) {
      const bool in_low = (labels[t] == 1) ? sol.alpha[t] > 0.0 : sol.alpha[t] < C;
      if (!in_low || viol[t] >= m_up) continue;
      const double* xt = x.row_ptr(t);
      double kut = 0.0;
      for (int c = 0; c < p; ++c) kut += xu[c] * xt[c];
      double eta_t = diag[i_up] + diag[t] - 2.0 * kut;
      if (eta_t < 1e-12) eta_t = 1e-12;
      const double b = m_up - viol[t];
      const double gain = b * b / eta_t;
      if (gain > best_gain) {
        best_gain = gain;
        j_best = t;
        eta_best = eta_t;
      }
    }

    const int i = i_up, j = j_best;
    const int yi = labels[i], yj = labels[j];
    const double* xi = x.row_ptr(i);
    const double* xj = x.row_ptr(j);
    const double eta = eta_best;

    const double gi = yi * f[i] - 1.0;
    const double gj = yj * f[j] - 1.0;
    // Move along alpha_i += yi*t, alpha_j -= yj*t (keeps sum(y a) fixed).
    double t_step = -(yi * gi - yj * gj) / eta;
    // Box clipping.
    double lo = -1e300, hi = 1e300;
    auto bound = [&](double a, int y, double coef) {
      // a + coef*y*t in [0, C]
      const double s = coef * y;
      if (s > 0) {
        lo = std::max(lo, -a / s);
        hi = std::min(hi, (C - a) / s);
      } else {
        lo = std::max(lo, (C - a) / s);
        hi = std::min(hi, -a / s);
      }
    };
    bound(sol.alpha[i], yi, 1.0);
    bound(sol.alpha[j], yj, -1.0);
    t_step = std::clamp(t_step, lo, hi);
    if (t_step == 0.0) {
      // Numerically stuck pair; treat as converged at this gap.
      break;
    }
    const double dai = yi * t_step;
    const double daj = -yj * t_step;
    sol.alpha[i] += dai;
    sol.alpha[j] += daj;
    const double ci = dai * yi;
    const double cj = daj * yj;
    for (int c = 0; c < p; ++c) w[c] += ci * xi[c] + cj * xj[c];
    for (int t = 0; t < n; ++t) {
      const double* xt = x.row_ptr(t);
      double df = 0.0;
      for (int c = 0; c < p; ++c) df += (ci * xi[c] + cj * xj[c]) * xt[c];
      f[t] += df;
    }
  }

  sol.w = w;
  // Bias from free support vectors, midpoint fallback.
  double bsum = 0.0;
  int bcount = 0;
  for (int i = 0; i < n; ++i) {
    if (sol.alpha[i] > 1e-8 * C && sol.alpha[i] < C * (1.0 - 1e-8)) {
      bsum += labels[i] - f[i];
      ++bcount;
    }
  }
  if (bcount > 0) {
    sol.bias = bsum / bcount;
  } else {
    double m_up = -1e300, m_low = 1e300;
    for (int t = 0; t < n; ++t) {
      const double v = labels[t] - f[t];
      const bool in_up = (labels[t] == 1) ? sol.alpha[t] < C : sol.alpha[t] > 0.0;
      const bool in_low = (labels[t] == 1) ? sol.alpha[t] > 0.0 : sol.alpha[t] < C;
      if (in_up) m_up = std::max(m_up, v);
      if (in_low) m_low = std::min(m_low, v);
    }
    sol.bias = 0.5 * (m_up + m_low);
  }

  double obj = 0.0;
  for (int i = 0; i < n; ++i) obj += sol.alpha[i];
  obj -= 0.5 * dot(w, w);
  sol.dual_objective = obj;
  return sol;
}

double trace_objective(const TrainingSet& ts, const std::vector<Vec>& signed_duals,
                       const BlockProjection& proj) {
  const int n = ts.count();
  const int d = ts.block_dim;
  double total = 0.0;
  for (int b = 0; b < ts.num_blocks; ++b) {
    const int off = b * d;
    const Matrix& L = proj.blocks[b];
    for (const Vec& z : signed_duals) {
      // || L^T (X_b^T z) ||^2 summed over classes.
      Vec v(d, 0.0);
      for (int i = 0; i < n; ++i) {
        const double zi = z[i];
        if (zi == 0.0) continue;
        const double* row = ts.features.row_ptr(i) + off;
        for (int c = 0; c < d; ++c) v[c] += zi * row[c];
      }
      for (int j = 0; j < L.cols(); ++j) {
        double s = 0.0;
        for (int c = 0; c < d; ++c) s += v[c] * L(c, j);
        total += s * s;
      }
    }
  }
  return total;
}

BlockProjection trace_max_step(const TrainingSet& ts, const std::vector<Vec>& signed_duals,
                               int r, const BlockProjection* prev) {
  const int n = ts.count();
  const int d = ts.block_dim;
  const int m = static_cast<int>(signed_duals.size());

  BlockProjection proj;
  proj.rank = r;
  proj.block_dim = d;
  proj.blocks.reserve(ts.num_blocks);

  for (int b = 0; b < ts.num_blocks; ++b) {
    const int off = b * d;
    // V = X_b^T Z, d x M; the trace matrix is V V^T with rank <= M.
    Matrix v(d, m);
    for (int c = 0; c < m; ++c) {
      const Vec& z = signed_duals[c];
      for (int i = 0; i < n; ++i) {
        const double zi = z[i];
        if (zi == 0.0) continue;
        const double* row = ts.features.row_ptr(i) + off;
        for (int a = 0; a < d; ++a) v(a, c) += zi * row[a];
      }
    }
    Matrix small(m, m);
    for (int a = 0; a < m; ++a)
      for (int c = a; c < m; ++c) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += v(i, a) * v(i, c);
        small(a, c) = s;
        small(c, a) = s;
      }
    const auto eig = symlin::sym_eig(small);
    const double lam_max = std::max(eig.eigenvalues.front(), 0.0);

    Matrix L(d, r);
    int filled = 0;
    for (int j = 0; j < m && filled < r; ++j) {
      if (eig.eigenvalues[j] <= std::max(1e-10 * lam_max, 0.0) || eig.eigenvalues[j] <= 0.0)
        break;
      Vec u(d, 0.0);
      const double inv = 1.0 / std::sqrt(eig.eigenvalues[j]);
      for (int c = 0; c < m; ++c) {
        const double q = eig.eigenvectors(c, j);
        if (q == 0.0) continue;
        for (int a = 0; a < d; ++a) u[a] += q * v(a, c);
      }
      for (double& val : u) val *= inv;
      if (append_orthogonalized(L, filled, u)) ++filled;
    }
    complete_basis(L, filled, prev ? &prev->blocks[b] : nullptr);
    proj.blocks.push_back(std::move(L));
  }
  return proj;
}

Matrix project(const Matrix& features, const BlockProjection& proj) {
  const int n = features.rows();
  const int d = proj.block_dim;
  const int r = proj.rank;
  const int nb = proj.num_blocks();
  if (features.cols() != nb * d)
    throw DimensionMismatch("project: feature dim does not match projection");
  Matrix out(n, nb * r);
  for (int i = 0; i < n; ++i) {
    const double* row = features.row_ptr(i);
    double* orow = out.row_ptr(i);
    for (int b = 0; b < nb; ++b) {
      const Matrix& L = proj.blocks[b];
      const double* xb = row + b * d;
      double* ob = orow + b * r;
      for (int c = 0; c < d; ++c) {
        const double xc = xb[c];
        if (xc == 0.0) continue;
        const double* lrow = L.row_ptr(c);
        for (int j = 0; j < r; ++j) ob[j] += xc * lrow[j];
      }
    }
  }
  return out;
}

Vec project_one(const Vec& feature, const BlockProjection& proj) {
  Matrix tmp(1, static_cast<int>(feature.size()));
  std::copy(feature.begin(), feature.end(), tmp.row_ptr(0));
  const Matrix p = project(tmp, proj);
  return Vec(p.row_ptr(0), p.row_ptr(0) + p.cols());
}

LrsvmModel train(const TrainingSet& ts, int r, double C, int max_iters, double tol) {
  ts.validate();
  const int n = ts.count();
  const int m = ts.num_classes();

  LrsvmModel model;
  model.projection = pca_init(ts, r);
  model.svm.C = C;

  std::vector<Vec> warm(m);
  std::vector<std::vector<int>> ova_labels(m, std::vector<int>(n));
  for (int c = 0; c < m; ++c)
    for (int i = 0; i < n; ++i) ova_labels[c][i] = (ts.labels[i] == c + 1) ? 1 : -1;

  double prev_obj = 0.0;
  for (int iter = 0; iter < max_iters; ++iter) {
    const Matrix projected = project(ts.features, model.projection);

    model.svm.per_class.clear();
    double obj = 0.0;
    for (int c = 0; c < m; ++c) {
      SvmClassSolution sol = svm_solve_dual(projected, ova_labels[c], C,
                                            warm[c].empty() ? nullptr : &warm[c]);
      obj += sol.dual_objective;
      warm[c] = sol.alpha;
      model.svm.per_class.push_back(std::move(sol));
    }
    model.objective_trajectory.push_back(obj);

    const bool converged =
        iter > 0 && std::abs(obj - prev_obj) <= tol * std::max(std::abs(prev_obj), 1e-12);
    prev_obj = obj;
    if (converged || iter + 1 == max_iters) break;

    std::vector<Vec> signed_duals(m, Vec(n));
    for (int c = 0; c < m; ++c)
      for (int i = 0; i < n; ++i)
        signed_duals[c][i] = model.svm.per_class[c].alpha[i] * ova_labels[c][i];

    TraceStep step;
    step.before = trace_objective(ts, signed_duals, model.projection);
    model.projection = trace_max_step(ts, signed_duals, r, &model.projection);
    step.after = trace_objective(ts, signed_duals, model.projection);
    model.trace_trajectory.push_back(step);
  }
  return model;
}

Prediction predict(const LrsvmModel& model, const Vec& feature) {
  const int expect = model.projection.num_blocks() * model.projection.block_dim;
  if (static_cast<int>(feature.size()) != expect)
    throw DimensionMismatch("predict: feature length " + std::to_string(feature.size()) +
                            ", model expects " + std::to_string(expect));
  const Vec projected = project_one(feature, model.projection);

  Prediction pred;
  pred.scores.reserve(model.svm.per_class.size());
  for (const auto& cls : model.svm.per_class)
    pred.scores.push_back(dot(cls.w, projected) + cls.bias);
  pred.label = 1;
  for (size_t c = 1; c < pred.scores.size(); ++c)
    if (pred.scores[c] > pred.scores[pred.label - 1]) pred.label = static_cast<int>(c) + 1;
  return pred;
}

}  // namespace clm::lrsvm
