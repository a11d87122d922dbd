#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "clm/image.hpp"
#include "clm/lrsvm.hpp"
#include "clm/spm.hpp"

namespace clm {

enum class DescriptorKind { Grad, EnrichedGrad, LogCov, EnrichedLogCov };

std::string to_string(DescriptorKind kind);
DescriptorKind descriptor_kind_from_string(const std::string& name);

struct RunConfig {
  double beta = 0.4;
  double rho = 0.5;
  double epsilon = 1e-3;
  double C = 10.0;
  double rank_ratio = 100.0;  // compression ratio d/r
  int rank = 0;               // explicit rank override when > 0
  PyramidSpec pyramid = default_pyramid();
  DescriptorKind descriptor = DescriptorKind::EnrichedGrad;
  std::vector<int> cell_sizes = {4, 8, 16};
  int step = 2;
  int logcov_patch = 16;
  bool pbr = false;
  int max_iters = 5;
  double tol = 1e-3;
  uint64_t seed = 0;

  EmbeddingParams embedding() const { return {beta, rho}; }
  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
  static RunConfig from_file(const std::string& path);
};

struct DatasetItem {
  std::string path;
  int class_index = 0;  // 0-based
  bool is_test = false;
};

struct DatasetManifest {
  std::string root;
  std::vector<std::string> classes;
  std::vector<DatasetItem> items;
  std::vector<std::string> warnings;  // skipped/unreadable files
};

// Scans one subdirectory per class (lexicographic order), keeping
// PNG/PGM files whose min dimension is >= 64. Undersized or unreadable
// files are recorded as warnings. Throws EmptyDataset.
DatasetManifest ingest(const std::string& root);

// Seeded per-class train/test split: n_train_per_class sampled without
// replacement, remainder is test. Throws InsufficientSamples.
DatasetManifest split(const DatasetManifest& manifest, int n_train_per_class, uint64_t seed);

// Descriptor extraction for one (possibly PBR-cropped) image.
DescriptorSet extract_descriptors(const ImageGray& img, const RunConfig& cfg);

// Full per-image representation: optional PBR, descriptors, SPM feature.
SpmFeature compute_feature(const ImageGray& img, const RunConfig& cfg);

struct EvalReport {
  double accuracy = 0.0;
  Vec per_class_accuracy;
  std::vector<std::vector<int>> confusion;  // [true][predicted]
  double mean_average_precision = 0.0;
  std::map<std::string, double> timings_sec;

  std::string to_json(const std::vector<std::string>& class_names) const;
  std::string to_table(const std::vector<std::string>& class_names) const;
};

struct TrainResult {
  lrsvm::LrsvmModel model;
  EvalReport train_report;
};

// Trains on the manifest's train split.
TrainResult run_train(const DatasetManifest& manifest, const RunConfig& cfg);

// Evaluates the model on the manifest's test split (or all items when
// none is marked test).
EvalReport run_eval(const lrsvm::LrsvmModel& model, const DatasetManifest& manifest,
                    const RunConfig& cfg);

// Metric helpers (exposed for tests).
double average_precision(const Vec& scores, const std::vector<int>& relevant);

}  // namespace clm
