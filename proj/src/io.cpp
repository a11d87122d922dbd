#include "clm/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "clm/errors.hpp"

namespace clm {

namespace {

using nlohmann::json;

void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint32_t read_u32(std::istream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw Error("truncated file");
  return v;
}

void write_f32(std::ostream& out, const float* data, size_t n) {
  out.write(reinterpret_cast<const char*>(data), n * sizeof(float));
}

void write_f64(std::ostream& out, const double* data, size_t n) {
  out.write(reinterpret_cast<const char*>(data), n * sizeof(double));
}

void read_f64(std::istream& in, double* data, size_t n) {
  in.read(reinterpret_cast<char*>(data), n * sizeof(double));
  if (!in) throw Error("truncated payload");
}

}  // namespace

void write_clmf(const std::string& path, const DescriptorSet& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write("CLMF", 4);
  write_u32(out, 1);
  write_u32(out, static_cast<uint32_t>(ds.count()));
  write_u32(out, static_cast<uint32_t>(ds.dim()));

  std::vector<float> buf(ds.descriptors.data().begin(), ds.descriptors.data().end());
  write_f32(out, buf.data(), buf.size());

  buf.resize(static_cast<size_t>(ds.count()) * 2);
  for (int i = 0; i < ds.count(); ++i) {
    buf[2 * i] = static_cast<float>(ds.positions[i][0]);
    buf[2 * i + 1] = static_cast<float>(ds.positions[i][1]);
  }
  write_f32(out, buf.data(), buf.size());

  buf.assign(ds.scales.begin(), ds.scales.end());
  write_f32(out, buf.data(), buf.size());
  if (!out) throw Error("write failure on " + path);
}

DescriptorSet read_clmf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "CLMF", 4) != 0) throw Error("bad CLMF magic in " + path);
  const uint32_t version = read_u32(in);
  if (version != 1) throw Error("unsupported CLMF version in " + path);
  const uint32_t n = read_u32(in);
  const uint32_t k = read_u32(in);

  DescriptorSet ds;
  ds.descriptors = Matrix(static_cast<int>(n), static_cast<int>(k));
  std::vector<float> buf(static_cast<size_t>(n) * k);
  in.read(reinterpret_cast<char*>(buf.data()), buf.size() * sizeof(float));
  if (!in) throw Error("truncated CLMF data in " + path);
  std::copy(buf.begin(), buf.end(), ds.descriptors.data().begin());

  buf.resize(static_cast<size_t>(n) * 2);
  in.read(reinterpret_cast<char*>(buf.data()), buf.size() * sizeof(float));
  if (!in) throw Error("truncated CLMF positions in " + path);
  ds.positions.resize(n);
  for (uint32_t i = 0; i < n; ++i) ds.positions[i] = {buf[2 * i], buf[2 * i + 1]};

  buf.resize(n);
  in.read(reinterpret_cast<char*>(buf.data()), buf.size() * sizeof(float));
  if (!in) throw Error("truncated CLMF scales in " + path);
  ds.scales.assign(buf.begin(), buf.end());
  return ds;
}

void save_model(const std::string& path, const lrsvm::LrsvmModel& model,
                const std::string& config_echo_json) {
  json header;
  header["version"] = 1;
  header["num_classes"] = model.svm.per_class.size();
  header["num_blocks"] = model.projection.num_blocks();
  header["block_dim"] = model.projection.block_dim;
  header["rank"] = model.projection.rank;
  header["C"] = model.svm.C;
  header["beta"] = model.embedding.beta;
  header["rho"] = model.embedding.rho;
  json pyr = json::array();
  for (const auto& l : model.pyramid.levels) pyr.push_back({l.rows, l.cols});
  header["pyramid"] = pyr;
  header["class_names"] = model.class_names;
  header["num_train"] = model.svm.per_class.empty() ? 0 : model.svm.per_class[0].alpha.size();
  header["objective_trajectory"] = model.objective_trajectory;
  json traces = json::array();
  for (const auto& t : model.trace_trajectory) traces.push_back({t.before, t.after});
  header["trace_trajectory"] = traces;
  if (!config_echo_json.empty()) header["config"] = json::parse(config_echo_json);

  const std::string hs = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write("CLMM", 4);
  write_u32(out, static_cast<uint32_t>(hs.size()));
  out.write(hs.data(), hs.size());

  for (const Matrix& L : model.projection.blocks)
    write_f64(out, L.data().data(), L.data().size());
  for (const auto& cls : model.svm.per_class) {
    write_f64(out, cls.w.data(), cls.w.size());
    write_f64(out, &cls.bias, 1);
    write_f64(out, cls.alpha.data(), cls.alpha.size());
  }
  if (!out) throw Error("write failure on " + path);
}

lrsvm::LrsvmModel load_model(const std::string& path, std::string* config_echo_json) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "CLMM", 4) != 0) throw Error("bad model magic in " + path);
  const uint32_t hlen = read_u32(in);
  std::string hs(hlen, '\0');
  in.read(hs.data(), hlen);
  if (!in) throw Error("truncated model header in " + path);
  const json header = json::parse(hs);

  lrsvm::LrsvmModel model;
  const int m = header.at("num_classes").get<int>();
  const int b = header.at("num_blocks").get<int>();
  const int d = header.at("block_dim").get<int>();
  const int r = header.at("rank").get<int>();
  const size_t n = header.at("num_train").get<size_t>();
  model.svm.C = header.at("C").get<double>();
  model.embedding.beta = header.at("beta").get<double>();
  model.embedding.rho = header.at("rho").get<double>();
  for (const auto& l : header.at("pyramid"))
    model.pyramid.levels.push_back({l.at(0).get<int>(), l.at(1).get<int>()});
  model.class_names = header.at("class_names").get<std::vector<std::string>>();
  model.objective_trajectory = header.at("objective_trajectory").get<Vec>();
  for (const auto& t : header.at("trace_trajectory"))
    model.trace_trajectory.push_back({t.at(0).get<double>(), t.at(1).get<double>()});
  if (config_echo_json) {
    *config_echo_json = header.contains("config") ? header.at("config").dump() : "";
  }

  model.projection.rank = r;
  model.projection.block_dim = d;
  for (int i = 0; i < b; ++i) {
    Matrix L(d, r);
    read_f64(in, L.data().data(), L.data().size());
    model.projection.blocks.push_back(std::move(L));
  }
  for (int c = 0; c < m; ++c) {
    lrsvm::SvmClassSolution cls;
    cls.w.resize(static_cast<size_t>(b) * r);
    read_f64(in, cls.w.data(), cls.w.size());
    read_f64(in, &cls.bias, 1);
    cls.alpha.resize(n);
    read_f64(in, cls.alpha.data(), n);
    model.svm.per_class.push_back(std::move(cls));
  }
  return model;
}

std::string model_header_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "CLMM", 4) != 0) throw Error("bad model magic in " + path);
  const uint32_t hlen = read_u32(in);
  std::string hs(hlen, '\0');
  in.read(hs.data(), hlen);
  if (!in) throw Error("truncated model header in " + path);
  return nlohmann::json::parse(hs).dump(2);
}

}  // namespace clm
