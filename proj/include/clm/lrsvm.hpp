#pragma once

#include <string>
#include <vector>

#include "clm/embedding.hpp"
#include "clm/matrix.hpp"
#include "clm/spm.hpp"

namespace clm::lrsvm {

struct TrainingSet {
  Matrix features;          // N x D, rows are SPM features with block structure
  std::vector<int> labels;  // 1..M, dense
  int num_blocks = 1;       // B
  int block_dim = 0;        // d, D = B * d

  int count() const { return features.rows(); }
  int feature_dim() const { return features.cols(); }
  int num_classes() const;
  void validate() const;
};

// Per-block orthonormal d x r projections.
struct BlockProjection {
  std::vector<Matrix> blocks;
  int rank = 0;
  int block_dim = 0;

  int num_blocks() const { return static_cast<int>(blocks.size()); }
};

struct SvmClassSolution {
  Vec alpha;            // N duals in [0, C]
  Vec w;                // primal weights over the projected space
  double bias = 0.0;
  double dual_objective = 0.0;
};

struct SvmSolution {
  std::vector<SvmClassSolution> per_class;
  double C = 10.0;
};

struct TraceStep {
  double before = 0.0;
  double after = 0.0;
};

struct LrsvmModel {
  BlockProjection projection;
  SvmSolution svm;
  EmbeddingParams embedding;
  PyramidSpec pyramid;
  std::vector<std::string> class_names;
  Vec objective_trajectory;          // summed dual objective per alternation round
  std::vector<TraceStep> trace_trajectory;
};

// Per-block PCA basis: top-r eigenvectors of the centered block
// covariance. Uses the Gram matrix when N < d. Throws RankTooLarge.
BlockProjection pca_init(const TrainingSet& ts, int r);

// Linear SVM dual with equality and box constraints, solved by
// maximal-violating-pair updates. labels are +/-1. Deterministic.
// warm, when given, must be box-feasible with sum(y*alpha) = 0.
SvmClassSolution svm_solve_dual(const Matrix& x, const std::vector<int>& labels, double C,
                                const Vec* warm = nullptr, double tol = 1e-4,
                                long max_pair_updates = -1);

// Closed-form projection update: per block, top-r eigenvectors of
// F_b^T (sum_m z_m z_m^T) F_b with z_m = Y_m alpha_m. Rank-deficient
// directions are completed from `prev` (when given) then from the
// canonical basis, deterministically.
BlockProjection trace_max_step(const TrainingSet& ts, const std::vector<Vec>& signed_duals,
                               int r, const BlockProjection* prev = nullptr);

// Value of the trace objective for a candidate projection.
double trace_objective(const TrainingSet& ts, const std::vector<Vec>& signed_duals,
                       const BlockProjection& proj);

// N x (B*r) projection of the training features.
Matrix project(const Matrix& features, const BlockProjection& proj);
Vec project_one(const Vec& feature, const BlockProjection& proj);

// Alternating optimization: Step One (per-class dual solve on the
// projected features) and Step Two (trace maximization), starting from
// the PCA basis, warm-starting duals across rounds.
LrsvmModel train(const TrainingSet& ts, int r, double C, int max_iters = 5,
                 double tol = 1e-3);

struct Prediction {
  int label = 0;  // 1..M, ties broken by lowest index
  Vec scores;
};

Prediction predict(const LrsvmModel& model, const Vec& feature);

}  // namespace clm::lrsvm
