#include "clm/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "clm/errors.hpp"
#include "clm/pbr.hpp"

namespace clm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string to_string(DescriptorKind kind) {
  switch (kind) {
    case DescriptorKind::Grad: return "grad";
    case DescriptorKind::EnrichedGrad: return "egrad";
    case DescriptorKind::LogCov: return "logcov";
    case DescriptorKind::EnrichedLogCov: return "elogcov";
  }
  return "egrad";
}

DescriptorKind descriptor_kind_from_string(const std::string& name) {
  if (name == "grad") return DescriptorKind::Grad;
  if (name == "egrad") return DescriptorKind::EnrichedGrad;
  if (name == "logcov") return DescriptorKind::LogCov;
  if (name == "elogcov") return DescriptorKind::EnrichedLogCov;
  throw Error("unknown descriptor kind: " + name);
}

std::string RunConfig::to_json() const {
  json j;
  j["beta"] = beta;
  j["rho"] = rho;
  j["epsilon"] = epsilon;
  j["C"] = C;
  j["rank_ratio"] = rank_ratio;
  if (rank > 0) j["rank"] = rank;
  json pyr = json::array();
  for (const auto& l : pyramid.levels) pyr.push_back({l.rows, l.cols});
  j["pyramid"] = pyr;
  j["descriptor"] = to_string(descriptor);
  j["cell_sizes"] = cell_sizes;
  j["step"] = step;
  j["logcov_patch"] = logcov_patch;
  j["pbr"] = pbr;
  j["max_iters"] = max_iters;
  j["tol"] = tol;
  j["seed"] = seed;
  return j.dump();
}

RunConfig RunConfig::from_json(const std::string& text) {
  const json j = json::parse(text);
  RunConfig cfg;
  cfg.beta = j.value("beta", cfg.beta);
  cfg.rho = j.value("rho", cfg.rho);
  cfg.epsilon = j.value("epsilon", cfg.epsilon);
  cfg.C = j.value("C", cfg.C);
  cfg.rank_ratio = j.value("rank_ratio", cfg.rank_ratio);
  cfg.rank = j.value("rank", cfg.rank);
  if (j.contains("pyramid")) {
    cfg.pyramid.levels.clear();
    for (const auto& l : j.at("pyramid"))
      cfg.pyramid.levels.push_back({l.at(0).get<int>(), l.at(1).get<int>()});
  }
  if (j.contains("descriptor"))
    cfg.descriptor = descriptor_kind_from_string(j.at("descriptor").get<std::string>());
  cfg.cell_sizes = j.value("cell_sizes", cfg.cell_sizes);
  cfg.step = j.value("step", cfg.step);
  cfg.logcov_patch = j.value("logcov_patch", cfg.logcov_patch);
  cfg.pbr = j.value("pbr", cfg.pbr);
  cfg.max_iters = j.value("max_iters", cfg.max_iters);
  cfg.tol = j.value("tol", cfg.tol);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

DatasetManifest ingest(const std::string& root) {
  if (!fs::is_directory(root)) throw EmptyDataset("dataset root not found: " + root);

  DatasetManifest m;
  m.root = root;
  std::vector<std::string> class_dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) class_dirs.push_back(entry.path().filename().string());
  std::sort(class_dirs.begin(), class_dirs.end());

  for (const std::string& cls : class_dirs) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(fs::path(root) / cls)) {
      if (!entry.is_regular_file()) continue;
      std::string ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      if (ext == ".png" || ext == ".pgm") files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    bool any = false;
    for (const std::string& f : files) {
      try {
        const ImageGray img = load_image(f);
        if (!img.meets_min_size()) {
          m.warnings.push_back("skipped (below min size 64): " + f);
          continue;
        }
      } catch (const UnreadableImage& e) {
        m.warnings.push_back(std::string("skipped (unreadable): ") + e.what());
        continue;
      }
      if (!any) {
        m.classes.push_back(cls);
        any = true;
      }
      m.items.push_back({f, static_cast<int>(m.classes.size()) - 1, false});
    }
  }
  if (m.items.empty()) throw EmptyDataset("no usable images under " + root);
  return m;
}

DatasetManifest split(const DatasetManifest& manifest, int n_train_per_class, uint64_t seed) {
  DatasetManifest out = manifest;
  std::mt19937_64 rng(seed);
  for (size_t c = 0; c < manifest.classes.size(); ++c) {
    std::vector<size_t> idx;
    for (size_t i = 0; i < manifest.items.size(); ++i)
      if (manifest.items[i].class_index == static_cast<int>(c)) idx.push_back(i);
    if (static_cast<int>(idx.size()) <= n_train_per_class)
      throw InsufficientSamples("class " + manifest.classes[c] + " has only " +
                                std::to_string(idx.size()) + " files");
    std::shuffle(idx.begin(), idx.end(), rng);
    for (size_t j = 0; j < idx.size(); ++j)
      out.items[idx[j]].is_test = j >= static_cast<size_t>(n_train_per_class);
  }
  return out;
}

DescriptorSet extract_descriptors(const ImageGray& img, const RunConfig& cfg) {
  switch (cfg.descriptor) {
    case DescriptorKind::Grad:
      return dense_grad_descriptors(img, cfg.cell_sizes, cfg.step);
    case DescriptorKind::EnrichedGrad:
      return enrich(dense_grad_descriptors(img, cfg.cell_sizes, cfg.step), img);
    case DescriptorKind::LogCov:
      return logcov_descriptors(img, cfg.logcov_patch, cfg.step);
    case DescriptorKind::EnrichedLogCov:
      return enrich(logcov_descriptors(img, cfg.logcov_patch, cfg.step), img);
  }
  throw Error("unreachable descriptor kind");
}

SpmFeature compute_feature(const ImageGray& img, const RunConfig& cfg) {
  const ImageGray& use = cfg.pbr ? apply_pbr(img) : img;
  const DescriptorSet ds = extract_descriptors(use, cfg);
  return spm_feature(ds, use.width, use.height, cfg.pyramid, cfg.embedding(), cfg.epsilon);
}

namespace {

struct FeatureTable {
  Matrix features;  // N x D
  std::vector<int> labels;  // 1..M
  int num_blocks = 0;
  int block_dim = 0;
};

FeatureTable features_for(const DatasetManifest& manifest, const RunConfig& cfg,
                          bool test_split, double* elapsed) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Vec> rows;
  std::vector<int> labels;
  int num_blocks = cfg.pyramid.block_count();
  for (const auto& item : manifest.items) {
    if (item.is_test != test_split) continue;
    try {
      const ImageGray img = load_image(item.path);
      SpmFeature feat = compute_feature(img, cfg);
      rows.push_back(std::move(feat.concatenated));
      labels.push_back(item.class_index + 1);
    } catch (const Error& e) {
      throw Error("while processing " + item.path + ": " + e.what());
    }
  }
  if (rows.empty()) throw EmptyDataset("no images in the requested split");

  FeatureTable table;
  table.num_blocks = num_blocks;
  table.block_dim = static_cast<int>(rows.front().size()) / num_blocks;
  table.features = Matrix(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i)
    std::copy(rows[i].begin(), rows[i].end(), table.features.row_ptr(static_cast<int>(i)));
  table.labels = std::move(labels);
  if (elapsed) *elapsed = seconds_since(t0);
  return table;
}

EvalReport evaluate_features(const lrsvm::LrsvmModel& model, const FeatureTable& table) {
  const auto t0 = std::chrono::steady_clock::now();
  const int m = static_cast<int>(model.svm.per_class.size());
  const int n = table.features.rows();

  EvalReport report;
  report.confusion.assign(m, std::vector<int>(m, 0));
  Matrix scores(n, m);
  int correct = 0;
  for (int i = 0; i < n; ++i) {
    Vec feat(table.features.row_ptr(i), table.features.row_ptr(i) + table.features.cols());
    const lrsvm::Prediction pred = lrsvm::predict(model, feat);
    for (int c = 0; c < m; ++c) scores(i, c) = pred.scores[c];
    const int truth = table.labels[i] - 1;
    report.confusion[truth][pred.label - 1] += 1;
    if (pred.label == table.labels[i]) ++correct;
  }
  report.accuracy = static_cast<double>(correct) / n;

  report.per_class_accuracy.assign(m, 0.0);
  double ap_sum = 0.0;
  for (int c = 0; c < m; ++c) {
    int total = 0;
    for (int p = 0; p < m; ++p) total += report.confusion[c][p];
    report.per_class_accuracy[c] =
        total > 0 ? static_cast<double>(report.confusion[c][c]) / total : 0.0;
    Vec cls_scores(n);
    std::vector<int> relevant(n);
    for (int i = 0; i < n; ++i) {
      cls_scores[i] = scores(i, c);
      relevant[i] = table.labels[i] == c + 1;
    }
    ap_sum += average_precision(cls_scores, relevant);
  }
  report.mean_average_precision = ap_sum / m;
  report.timings_sec["evaluate"] = seconds_since(t0);
  return report;
}

}  // namespace

double average_precision(const Vec& scores, const std::vector<int>& relevant) {
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  int hits = 0;
  double sum = 0.0;
  int total_relevant = 0;
  for (int r : relevant) total_relevant += r;
  if (total_relevant == 0) return 0.0;
  for (size_t rank = 0; rank < order.size(); ++rank) {
    if (relevant[order[rank]]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  return sum / total_relevant;
}

TrainResult run_train(const DatasetManifest& manifest, const RunConfig& cfg) {
  const auto t_total = std::chrono::steady_clock::now();
  double feat_time = 0.0;
  FeatureTable table = features_for(manifest, cfg, /*test_split=*/false, &feat_time);

  lrsvm::TrainingSet ts;
  ts.features = std::move(table.features);
  ts.labels = table.labels;
  ts.num_blocks = table.num_blocks;
  ts.block_dim = table.block_dim;

  int r = cfg.rank;
  if (r <= 0) r = static_cast<int>(ts.block_dim / cfg.rank_ratio);
  r = std::clamp(r, 1, std::min(ts.block_dim, ts.count()));

  const auto t_train = std::chrono::steady_clock::now();
  TrainResult result;
  result.model = lrsvm::train(ts, r, cfg.C, cfg.max_iters, cfg.tol);
  result.model.embedding = cfg.embedding();
  result.model.pyramid = cfg.pyramid;
  result.model.class_names = manifest.classes;
  const double train_time = seconds_since(t_train);

  table.features = std::move(ts.features);
  result.train_report = evaluate_features(result.model, table);
  result.train_report.timings_sec["features"] = feat_time;
  result.train_report.timings_sec["train"] = train_time;
  result.train_report.timings_sec["total"] = seconds_since(t_total);
  return result;
}

EvalReport run_eval(const lrsvm::LrsvmModel& model, const DatasetManifest& manifest,
                    const RunConfig& cfg) {
  bool has_test = false;
  for (const auto& item : manifest.items) has_test = has_test || item.is_test;

  DatasetManifest eval_manifest = manifest;
  if (!has_test)
    for (auto& item : eval_manifest.items) item.is_test = true;

  if (manifest.classes.size() != model.class_names.size())
    throw DimensionMismatch("run_eval: dataset has " + std::to_string(manifest.classes.size()) +
                            " classes, model expects " +
                            std::to_string(model.class_names.size()));

  double feat_time = 0.0;
  FeatureTable table = features_for(eval_manifest, cfg, /*test_split=*/true, &feat_time);
  if (table.features.cols() != model.projection.num_blocks() * model.projection.block_dim)
    throw DimensionMismatch("run_eval: feature dimension does not match model");

  EvalReport report = evaluate_features(model, table);
  report.timings_sec["features"] = feat_time;
  report.timings_sec["total"] = feat_time + report.timings_sec["evaluate"];
  return report;
}

std::string EvalReport::to_json(const std::vector<std::string>& class_names) const {
  json j;
  j["accuracy"] = accuracy;
  j["mean_average_precision"] = mean_average_precision;
  j["per_class_accuracy"] = json::object();
  for (size_t c = 0; c < class_names.size(); ++c)
    j["per_class_accuracy"][class_names[c]] = per_class_accuracy[c];
  j["confusion"] = confusion;
  j["timings_sec"] = timings_sec;
  return j.dump(2);
}

std::string EvalReport::to_table(const std::vector<std::string>& class_names) const {
  std::ostringstream out;
  out << "accuracy: " << accuracy << "\n";
  out << "mAP:      " << mean_average_precision << "\n";
  out << "per-class accuracy:\n";
  for (size_t c = 0; c < class_names.size(); ++c)
    out << "  " << class_names[c] << ": " << per_class_accuracy[c] << "\n";
  out << "confusion (rows = truth):\n";
  for (size_t c = 0; c < confusion.size(); ++c) {
    out << "  " << class_names[c] << ":";
    for (int v : confusion[c]) out << " " << v;
    out << "\n";
  }
  return out.str();
}

}  // namespace clm
