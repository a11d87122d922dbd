#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "clm/errors.hpp"
#include "clm/io.hpp"
#include "clm/pipeline.hpp"

using namespace clm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / (tag + "-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ImageGray striped_image(int w, int h, int kind, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.03);
  ImageGray img;
  img.width = w;
  img.height = h;
  img.pixels.resize(static_cast<size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double v = 0.5;
      if (kind == 0) v = (y / 4) % 2 ? 0.8 : 0.2;          // horizontal stripes
      else if (kind == 1) v = (x / 4) % 2 ? 0.8 : 0.2;     // vertical stripes
      else v = ((x / 4 + y / 4) % 2) ? 0.8 : 0.2;          // checkerboard
      img.at(x, y) = std::clamp(v + noise(rng), 0.0, 1.0);
    }
  return img;
}

// Three texture classes, n images each, as PGM files.
void write_dataset(const fs::path& root, int n_per_class) {
  const char* names[3] = {"checker", "horizontal", "vertical"};
  const int kinds[3] = {2, 0, 1};
  for (int c = 0; c < 3; ++c) {
    fs::create_directories(root / names[c]);
    for (int i = 0; i < n_per_class; ++i) {
      const ImageGray img = striped_image(64, 64, kinds[c], 100 * c + i);
      save_pgm(img, (root / names[c] / ("img" + std::to_string(i) + ".pgm")).string());
    }
  }
}

RunConfig fast_config() {
  RunConfig cfg;
  cfg.descriptor = DescriptorKind::Grad;
  cfg.cell_sizes = {4};
  cfg.step = 8;
  cfg.pyramid = PyramidSpec{{{1, 1}}};
  cfg.rank = 2;
  return cfg;
}

}  // namespace

TEST_CASE("RunConfig JSON round trip preserves every field") {
  RunConfig cfg;
  cfg.beta = 0.7;
  cfg.rho = 0.9;
  cfg.epsilon = 1e-2;
  cfg.C = 3.0;
  cfg.rank_ratio = 50.0;
  cfg.rank = 4;
  cfg.pyramid = PyramidSpec{{{1, 1}, {3, 2}}};
  cfg.descriptor = DescriptorKind::EnrichedLogCov;
  cfg.cell_sizes = {8, 16};
  cfg.step = 3;
  cfg.logcov_patch = 24;
  cfg.pbr = true;
  cfg.max_iters = 7;
  cfg.tol = 1e-2;
  cfg.seed = 99;

  const RunConfig back = RunConfig::from_json(cfg.to_json());
  CHECK(back.beta == cfg.beta);
  CHECK(back.rho == cfg.rho);
  CHECK(back.epsilon == cfg.epsilon);
  CHECK(back.C == cfg.C);
  CHECK(back.rank_ratio == cfg.rank_ratio);
  CHECK(back.rank == cfg.rank);
  CHECK(back.pyramid == cfg.pyramid);
  CHECK(back.descriptor == cfg.descriptor);
  CHECK(back.cell_sizes == cfg.cell_sizes);
  CHECK(back.step == cfg.step);
  CHECK(back.logcov_patch == cfg.logcov_patch);
  CHECK(back.pbr == cfg.pbr);
  CHECK(back.max_iters == cfg.max_iters);
  CHECK(back.tol == cfg.tol);
  CHECK(back.seed == cfg.seed);
}

TEST_CASE("descriptor kind names round trip") {
  for (auto kind : {DescriptorKind::Grad, DescriptorKind::EnrichedGrad, DescriptorKind::LogCov,
                    DescriptorKind::EnrichedLogCov})
    CHECK(descriptor_kind_from_string(to_string(kind)) == kind);
  CHECK_THROWS_AS(descriptor_kind_from_string("sift"), Error);
}

TEST_CASE("ingest finds classes lexicographically and warns on bad files") {
  TempDir tmp("clm-ingest");
  write_dataset(tmp.path, 2);
  // Undersized image in an existing class.
  save_pgm(striped_image(64, 32, 0, 7), (tmp.path / "checker" / "small.pgm").string());
  // Unreadable junk.
  std::ofstream(tmp.path / "checker" / "junk.png") << "not a png";

  const DatasetManifest m = ingest(tmp.path.string());
  REQUIRE(m.classes.size() == 3);
  CHECK(m.classes[0] == "checker");
  CHECK(m.classes[1] == "horizontal");
  CHECK(m.classes[2] == "vertical");
  CHECK(m.items.size() == 6u);
  CHECK(m.warnings.size() == 2u);
  for (const auto& item : m.items) CHECK(!item.is_test);
}

TEST_CASE("ingest on an empty root throws") {
  TempDir tmp("clm-empty");
  CHECK_THROWS_AS(ingest(tmp.path.string()), EmptyDataset);
}

TEST_CASE("split is seeded, per class, and complains when impossible") {
  TempDir tmp("clm-split");
  write_dataset(tmp.path, 5);
  const DatasetManifest m = ingest(tmp.path.string());

  const DatasetManifest a = split(m, 3, 42);
  const DatasetManifest b = split(m, 3, 42);
  const DatasetManifest c = split(m, 3, 43);
  for (size_t i = 0; i < m.items.size(); ++i) CHECK(a.items[i].is_test == b.items[i].is_test);
  bool differs = false;
  for (size_t i = 0; i < m.items.size(); ++i)
    differs = differs || (a.items[i].is_test != c.items[i].is_test);
  CHECK(differs);

  // Exactly 3 train / 2 test per class.
  std::vector<int> train_count(3, 0), test_count(3, 0);
  for (const auto& item : a.items)
    (item.is_test ? test_count : train_count)[item.class_index]++;
  for (int cidx = 0; cidx < 3; ++cidx) {
    CHECK(train_count[cidx] == 3);
    CHECK(test_count[cidx] == 2);
  }

  CHECK_THROWS_AS(split(m, 5, 1), InsufficientSamples);
}

TEST_CASE("CLMF descriptor files round trip") {
  TempDir tmp("clm-clmf");
  std::mt19937_64 rng(55);
  std::normal_distribution<double> dist;
  DescriptorSet ds;
  ds.descriptors = Matrix(7, 5);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 5; ++j) ds.descriptors(i, j) = dist(rng);
  for (int i = 0; i < 7; ++i) {
    ds.positions.push_back({i * 2.0, i * 3.0});
    ds.scales.push_back(4.0 + i);
  }
  const std::string path = (tmp.path / "x.clmf").string();
  write_clmf(path, ds);
  const DescriptorSet back = read_clmf(path);
  REQUIRE(back.count() == 7);
  REQUIRE(back.dim() == 5);
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 5; ++j)
      CHECK(back.descriptors(i, j) == doctest::Approx(ds.descriptors(i, j)).epsilon(1e-6));
    CHECK(back.positions[i][0] == doctest::Approx(ds.positions[i][0]));
    CHECK(back.scales[i] == doctest::Approx(ds.scales[i]));
  }
  CHECK_THROWS_AS(read_clmf((tmp.path / "missing.clmf").string()), Error);
}

TEST_CASE("compute_feature is deterministic and has the expected length") {
  const ImageGray img = striped_image(64, 64, 2, 5);
  const RunConfig cfg = fast_config();
  const SpmFeature a = compute_feature(img, cfg);
  const SpmFeature b = compute_feature(img, cfg);
  CHECK(a.concatenated == b.concatenated);
  // Grad: k = 128 -> per-block dim (129*130)/2.
  CHECK(a.concatenated.size() == 129u * 130u / 2u);
  for (double v : a.concatenated) CHECK(std::isfinite(v));
}

TEST_CASE("train/eval distinguishes the three texture classes") {
  TempDir tmp("clm-trainer");
  write_dataset(tmp.path, 4);
  const RunConfig cfg = fast_config();
  DatasetManifest m = ingest(tmp.path.string());
  m = split(m, 2, 7);

  const TrainResult result = run_train(m, cfg);
  CHECK(result.model.class_names == m.classes);
  CHECK(result.train_report.accuracy == doctest::Approx(1.0));

  const EvalReport report = run_eval(result.model, m, cfg);
  CHECK(report.accuracy == doctest::Approx(1.0));
  CHECK(report.mean_average_precision == doctest::Approx(1.0));
  REQUIRE(report.confusion.size() == 3u);
  int total = 0;
  for (const auto& row : report.confusion)
    for (int v : row) total += v;
  CHECK(total == 6);  // 2 test images per class
  CHECK(report.timings_sec.count("features") == 1u);

  // Model file round trip preserves predictions.
  const std::string model_path = (tmp.path / "m.clmm").string();
  save_model(model_path, result.model, cfg.to_json());
  std::string echo;
  const lrsvm::LrsvmModel loaded = load_model(model_path, &echo);
  CHECK(RunConfig::from_json(echo).step == cfg.step);
  CHECK(loaded.class_names == result.model.class_names);
  CHECK(loaded.projection.rank == result.model.projection.rank);

  const ImageGray probe = striped_image(64, 64, 0, 999);
  const SpmFeature feat = compute_feature(probe, cfg);
  const auto p0 = lrsvm::predict(result.model, feat.concatenated);
  const auto p1 = lrsvm::predict(loaded, feat.concatenated);
  CHECK(p0.label == p1.label);
  REQUIRE(p0.scores.size() == p1.scores.size());
  for (size_t i = 0; i < p0.scores.size(); ++i)
    CHECK(p1.scores[i] == doctest::Approx(p0.scores[i]).epsilon(1e-12));
  CHECK(m.classes[p0.label - 1] == "horizontal");

  // Class-count mismatch is rejected.
  TempDir tmp2("clm-mismatch");
  write_dataset(tmp2.path, 2);
  fs::remove_all(tmp2.path / "vertical");
  const DatasetManifest m2 = ingest(tmp2.path.string());
  CHECK_THROWS_AS(run_eval(result.model, m2, cfg), DimensionMismatch);
}

TEST_CASE("average precision hand oracles") {
  // Ranked relevance 1,0,1,0 -> (1/1 + 2/3) / 2.
  CHECK(average_precision({0.9, 0.8, 0.7, 0.6}, {1, 0, 1, 0}) ==
        doctest::Approx((1.0 + 2.0 / 3.0) / 2.0));
  // All relevant -> 1 regardless of scores.
  CHECK(average_precision({0.1, 0.5, 0.3}, {1, 1, 1}) == doctest::Approx(1.0));
  // Relevant item ranked last in a list of 4.
  CHECK(average_precision({0.9, 0.8, 0.7, 0.6}, {0, 0, 0, 1}) == doctest::Approx(0.25));
  // No relevant items.
  CHECK(average_precision({0.9, 0.8}, {0, 0}) == 0.0);
}

TEST_CASE("model header inspection returns valid JSON") {
  TempDir tmp("clm-header");
  lrsvm::TrainingSet ts;
  ts.features = Matrix(6, 4);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> dist;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 4; ++j) ts.features(i, j) = dist(rng) + (i % 2 ? 2.0 : -2.0) * (j == 0);
  ts.labels = {1, 2, 1, 2, 1, 2};
  ts.num_blocks = 2;
  ts.block_dim = 2;
  const lrsvm::LrsvmModel model = lrsvm::train(ts, 1, 10.0);
  const std::string path = (tmp.path / "h.clmm").string();
  save_model(path, model, "");
  const std::string header = model_header_json(path);
  CHECK(header.find("\"num_blocks\"") != std::string::npos);
  CHECK(header.find("\"rank\"") != std::string::npos);
}
