#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "clm/embedding.hpp"
#include "clm/errors.hpp"
#include "clm/gaussian.hpp"
#include "clm/io.hpp"
#include "clm/lrsvm.hpp"
#include "clm/pbr.hpp"
#include "clm/pipeline.hpp"
#include "clm/symlin.hpp"

namespace py = pybind11;
using namespace clm;

namespace {

Matrix to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 2) throw DimensionMismatch("expected a 2-d array");
  Matrix m(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
  std::copy(arr.data(), arr.data() + arr.size(), m.data().begin());
  return m;
}

py::array_t<double> from_matrix(const Matrix& m) {
  py::array_t<double> arr({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), arr.mutable_data());
  return arr;
}

ImageGray to_image(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 2) throw DimensionMismatch("expected a 2-d image array");
  ImageGray img;
  img.height = static_cast<int>(arr.shape(0));
  img.width = static_cast<int>(arr.shape(1));
  img.pixels.assign(arr.data(), arr.data() + arr.size());
  return img;
}

py::array_t<double> from_image(const ImageGray& img) {
  py::array_t<double> arr({img.height, img.width});
  std::copy(img.pixels.begin(), img.pixels.end(), arr.mutable_data());
  return arr;
}

RunConfig config_from(const std::string& json_text) {
  return json_text.empty() ? RunConfig{} : RunConfig::from_json(json_text);
}

}  // namespace

PYBIND11_MODULE(_clm, m) {
  m.doc() = "Codebookless Gaussian image classification: core operations";

  py::register_exception<Error>(m, "ClmError");

  // SPD / symmetric linear algebra.
  m.def("cholesky_lower", [](py::array_t<double, py::array::c_style | py::array::forcecast> a) {
    return from_matrix(symlin::cholesky_lower(to_matrix(a)));
  });
  m.def("sym_eig", [](py::array_t<double, py::array::c_style | py::array::forcecast> a) {
    const auto d = symlin::sym_eig(to_matrix(a));
    return py::make_tuple(from_matrix(d.eigenvectors), d.eigenvalues);
  });
  m.def("spd_power", [](py::array_t<double, py::array::c_style | py::array::forcecast> a,
                        double rho) { return from_matrix(symlin::spd_power(to_matrix(a), rho)); });
  m.def("spd_log", [](py::array_t<double, py::array::c_style | py::array::forcecast> a) {
    return from_matrix(symlin::spd_log(to_matrix(a)));
  });
  m.def("spd_exp", [](py::array_t<double, py::array::c_style | py::array::forcecast> a) {
    return from_matrix(symlin::spd_exp(to_matrix(a)));
  });
  m.def("half_vectorize", [](py::array_t<double, py::array::c_style | py::array::forcecast> a) {
    return symlin::half_vectorize(to_matrix(a));
  });
  m.def("half_unvectorize", [](const Vec& f, int dim) {
    return from_matrix(symlin::half_unvectorize(f, dim));
  });

  // Gaussian estimation and embedding.
  m.def(
      "fit_gaussian",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> descriptors,
         double epsilon) {
        DescriptorSet ds;
        ds.descriptors = to_matrix(descriptors);
        const GaussianModel gm = fit_gaussian(ds, epsilon);
        return py::make_tuple(gm.mean, from_matrix(gm.covariance));
      },
      py::arg("descriptors"), py::arg("epsilon") = 1e-3);
  m.def(
      "embed_gaussian",
      [](const Vec& mean, py::array_t<double, py::array::c_style | py::array::forcecast> cov,
         double beta, double rho) {
        GaussianModel gm{mean, to_matrix(cov)};
        const EmbeddedGaussian eg = embed(gm, {beta, rho});
        return py::make_tuple(from_matrix(eg.s), eg.f);
      },
      py::arg("mean"), py::arg("cov"), py::arg("beta") = 0.4, py::arg("rho") = 0.5);

  // Image-level operations.
  m.def(
      "compute_feature",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> image,
         const std::string& config_json) {
        const SpmFeature feat = compute_feature(to_image(image), config_from(config_json));
        return feat.concatenated;
      },
      py::arg("image"), py::arg("config_json") = std::string());
  m.def("saliency_map", [](py::array_t<double, py::array::c_style | py::array::forcecast> image) {
    const SaliencyMap sal = saliency_map(to_image(image));
    py::array_t<double> arr({sal.height, sal.width});
    std::copy(sal.values.begin(), sal.values.end(), arr.mutable_data());
    return arr;
  });
  m.def("apply_pbr", [](py::array_t<double, py::array::c_style | py::array::forcecast> image) {
    return from_image(apply_pbr(to_image(image)));
  });

  // LRSVM training and prediction.
  py::class_<lrsvm::LrsvmModel>(m, "Model")
      .def_property_readonly("num_classes",
                             [](const lrsvm::LrsvmModel& mod) { return mod.svm.per_class.size(); })
      .def_property_readonly("rank",
                             [](const lrsvm::LrsvmModel& mod) { return mod.projection.rank; })
      .def_property_readonly(
          "objective_trajectory",
          [](const lrsvm::LrsvmModel& mod) { return mod.objective_trajectory; })
      .def_property_readonly("class_names",
                             [](const lrsvm::LrsvmModel& mod) { return mod.class_names; })
      .def("predict",
           [](const lrsvm::LrsvmModel& mod, const Vec& feature) {
             const auto pred = lrsvm::predict(mod, feature);
             return py::make_tuple(pred.label, pred.scores);
           })
      .def("save", [](const lrsvm::LrsvmModel& mod, const std::string& path) {
        save_model(path, mod, "");
      });

  m.def(
      "train_lrsvm",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> features,
         const std::vector<int>& labels, int num_blocks, int rank, double C, int max_iters,
         double tol) {
        lrsvm::TrainingSet ts;
        ts.features = to_matrix(features);
        ts.labels = labels;
        ts.num_blocks = num_blocks;
        ts.block_dim = ts.feature_dim() / num_blocks;
        return lrsvm::train(ts, rank, C, max_iters, tol);
      },
      py::arg("features"), py::arg("labels"), py::arg("num_blocks") = 1, py::arg("rank") = 1,
      py::arg("C") = 10.0, py::arg("max_iters") = 5, py::arg("tol") = 1e-3);
  m.def("load_model", [](const std::string& path) { return load_model(path, nullptr); });
}
