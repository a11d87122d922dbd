#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "clm/errors.hpp"
#include "clm/io.hpp"
#include "clm/pbr.hpp"
#include "clm/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct CommonOpts {
  std::string config_path;
  uint64_t seed = 0;
  bool seed_set = false;
  bool pbr = false;
  bool pbr_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON run configuration");
  cmd->add_option("--seed", opts.seed, "random seed")->each([&](const std::string&) {
    opts.seed_set = true;
  });
  cmd->add_flag("--pbr", opts.pbr, "enable partial background removal")
      ->each([&](const std::string&) { opts.pbr_set = true; });
}

clm::RunConfig resolve_config(const CommonOpts& opts) {
  clm::RunConfig cfg;
  if (!opts.config_path.empty()) cfg = clm::RunConfig::from_file(opts.config_path);
  if (opts.seed_set) cfg.seed = opts.seed;
  if (opts.pbr_set) cfg.pbr = opts.pbr;
  return cfg;
}

std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c == '/' || c == '\\') c = '_';
  return out;
}

void print_warnings(const clm::DatasetManifest& manifest) {
  for (const auto& w : manifest.warnings) std::cerr << "warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Codebookless Gaussian image classification toolkit"};
  app.require_subcommand(1);

  CommonOpts extract_opts, embed_opts, train_opts, predict_opts, eval_opts;

  auto* cmd_extract = app.add_subcommand("extract", "dump per-image descriptors (CLMF)");
  std::string extract_root, extract_out;
  cmd_extract->add_option("dataset_root", extract_root)->required();
  cmd_extract->add_option("--out", extract_out, "output directory")->required();
  add_common(cmd_extract, extract_opts);

  auto* cmd_embed = app.add_subcommand("embed", "dump per-image SPM features (CLMF)");
  std::string embed_root, embed_out;
  cmd_embed->add_option("dataset_root", embed_root)->required();
  cmd_embed->add_option("--out", embed_out, "output directory")->required();
  add_common(cmd_embed, embed_opts);

  auto* cmd_train = app.add_subcommand("train", "train an LRSVM model");
  std::string train_root, train_model;
  std::string train_pbr_dump;
  cmd_train->add_option("dataset_root", train_root)->required();
  cmd_train->add_option("--model", train_model, "output model file")->required();
  cmd_train->add_option("--pbr-dump", train_pbr_dump, "write crop boxes as CSV");
  add_common(cmd_train, train_opts);

  auto* cmd_predict = app.add_subcommand("predict", "classify images (JSON lines)");
  std::string predict_model;
  std::vector<std::string> predict_images;
  cmd_predict->add_option("--model", predict_model)->required();
  cmd_predict->add_option("images", predict_images)->required();
  add_common(cmd_predict, predict_opts);

  auto* cmd_eval = app.add_subcommand("eval", "evaluate a model over a dataset");
  std::string eval_model, eval_root;
  cmd_eval->add_option("--model", eval_model)->required();
  cmd_eval->add_option("dataset_root", eval_root)->required();
  add_common(cmd_eval, eval_opts);

  auto* cmd_model = app.add_subcommand("model", "model file utilities");
  auto* cmd_inspect = cmd_model->add_subcommand("inspect", "print the model header");
  std::string inspect_file;
  cmd_inspect->add_option("file", inspect_file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*cmd_extract) {
      const clm::RunConfig cfg = resolve_config(extract_opts);
      const clm::DatasetManifest manifest = clm::ingest(extract_root);
      print_warnings(manifest);
      fs::create_directories(extract_out);
      for (const auto& item : manifest.items) {
        clm::ImageGray img = clm::load_image(item.path);
        if (cfg.pbr) img = clm::apply_pbr(img);
        const clm::DescriptorSet ds = clm::extract_descriptors(img, cfg);
        const std::string name = manifest.classes[item.class_index] + "__" +
                                 sanitize(fs::path(item.path).stem().string()) + ".clmf";
        clm::write_clmf((fs::path(extract_out) / name).string(), ds);
      }
      std::cout << "wrote " << manifest.items.size() << " descriptor dumps to " << extract_out
                << "\n";
    } else if (*cmd_embed) {
      const clm::RunConfig cfg = resolve_config(embed_opts);
      const clm::DatasetManifest manifest = clm::ingest(embed_root);
      print_warnings(manifest);
      fs::create_directories(embed_out);
      for (const auto& item : manifest.items) {
        const clm::ImageGray img = clm::load_image(item.path);
        const clm::SpmFeature feat = clm::compute_feature(img, cfg);
        clm::DescriptorSet ds;
        ds.descriptors = clm::Matrix(1, static_cast<int>(feat.concatenated.size()));
        std::copy(feat.concatenated.begin(), feat.concatenated.end(), ds.descriptors.row_ptr(0));
        ds.positions = {{img.width / 2.0, img.height / 2.0}};
        ds.scales = {1.0};
        const std::string stem = manifest.classes[item.class_index] + "__" +
                                 sanitize(fs::path(item.path).stem().string());
        const fs::path out_path = fs::path(embed_out) / (stem + ".clmf");
        clm::write_clmf(out_path.string(), ds);
        json sidecar;
        sidecar["config"] = json::parse(cfg.to_json());
        sidecar["source"] = item.path;
        sidecar["class"] = manifest.classes[item.class_index];
        std::ofstream side(out_path.string() + ".json");
        side << sidecar.dump(2) << "\n";
      }
      std::cout << "wrote " << manifest.items.size() << " feature dumps to " << embed_out << "\n";
    } else if (*cmd_train) {
      const clm::RunConfig cfg = resolve_config(train_opts);
      const clm::DatasetManifest manifest = clm::ingest(train_root);
      print_warnings(manifest);
      if (!train_pbr_dump.empty()) {
        std::ofstream csv(train_pbr_dump);
        for (const auto& item : manifest.items) {
          const clm::ImageGray img = clm::load_image(item.path);
          const clm::BoundingBox bb =
              cfg.pbr ? clm::pbr_box(img) : clm::BoundingBox{0, 0, img.width, img.height};
          csv << item.path << "," << bb.x0 << "," << bb.y0 << "," << bb.x1 << "," << bb.y1
              << "\n";
        }
      }
      const clm::TrainResult result = clm::run_train(manifest, cfg);
      clm::save_model(train_model, result.model, cfg.to_json());
      std::cout << result.train_report.to_table(manifest.classes);
      std::cout << result.train_report.to_json(manifest.classes) << "\n";
    } else if (*cmd_predict) {
      std::string echo;
      const clm::lrsvm::LrsvmModel model = clm::load_model(predict_model, &echo);
      clm::RunConfig cfg =
          echo.empty() ? clm::RunConfig{} : clm::RunConfig::from_json(echo);
      if (!predict_opts.config_path.empty()) cfg = resolve_config(predict_opts);
      for (const std::string& path : predict_images) {
        const clm::ImageGray img = clm::load_image(path);
        const clm::SpmFeature feat = clm::compute_feature(img, cfg);
        const clm::lrsvm::Prediction pred = clm::lrsvm::predict(model, feat.concatenated);
        json line;
        line["file"] = path;
        line["class"] = model.class_names[pred.label - 1];
        line["scores"] = pred.scores;
        std::cout << line.dump() << "\n";
      }
    } else if (*cmd_eval) {
      std::string echo;
      const clm::lrsvm::LrsvmModel model = clm::load_model(eval_model, &echo);
      clm::RunConfig cfg =
          echo.empty() ? clm::RunConfig{} : clm::RunConfig::from_json(echo);
      if (!eval_opts.config_path.empty()) cfg = resolve_config(eval_opts);
      const clm::DatasetManifest manifest = clm::ingest(eval_root);
      print_warnings(manifest);
      const clm::EvalReport report = clm::run_eval(model, manifest, cfg);
      std::cout << report.to_table(manifest.classes);
      std::cout << report.to_json(manifest.classes) << "\n";
    } else if (*cmd_inspect) {
      std::cout << clm::model_header_json(inspect_file) << "\n";
    }
  } catch (const clm::NotPositiveDefinite& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const clm::ConvergenceFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const clm::NoConvergence& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const clm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}
