/* Copyright 2026 The OTSNet Desk Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "otsnet/attention.hpp"
#include "otsnet/commands.hpp"
#include "otsnet/config.hpp"
#include "otsnet/decoder.hpp"
#include "otsnet/errors.hpp"
#include "otsnet/gradcheck_suite.hpp"
#include "otsnet/metrics.hpp"
#include "otsnet/model.hpp"
#include "otsnet/ops.hpp"
#include "otsnet/optim.hpp"
#include "otsnet/synth.hpp"
#include "otsnet/thinking.hpp"

namespace py = pybind11;
using namespace otsnet;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor::from(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array out(shape);
  const auto data = t.data();
  std::copy(data.begin(), data.end(), out.mutable_data());
  return out;
}

Array image_array(const std::vector<double>& pixels, std::size_t height, std::size_t width) {
  Array out({static_cast<py::ssize_t>(height), static_cast<py::ssize_t>(width)});
  std::copy(pixels.begin(), pixels.end(), out.mutable_data());
  return out;
}

RunConfig config_from(const py::dict& overrides, const std::string& path) {
  RunConfig cfg = path.empty() ? RunConfig{} : load_config(path);
  for (const auto& [key, value] : overrides) {
    set_config_value(cfg, py::str(key), py::str(value));
  }
  cfg.validate();
  return cfg;
}

py::dict recognition_dict(const Recognition& r) {
  py::dict d;
  d["text"] = r.text();
  d["confidences"] = r.confidences;
  d["mean_confidence"] = r.mean_confidence();
  d["stop"] = stop_reason_name(r.stop);
  return d;
}

// Owns a model built from a run configuration.
class PyModel {
 public:
  explicit PyModel(const RunConfig& cfg) : cfg_(cfg), model_(cfg.model) {}

  void initialize(std::uint64_t seed) { model_.initialize(seed); }
  void load(const std::string& dir) { load_checkpoint(model_.parameters(), dir); }
  void save(const std::string& dir) const { save_checkpoint(model_.parameters(), dir); }
  std::size_t parameter_count() const { return model_.parameters().total_elements(); }

  std::vector<std::string> parameter_names() const {
    std::vector<std::string> names;
    for (const auto& p : model_.parameters().entries()) names.push_back(p.name);
    return names;
  }

  Array parameter(const std::string& name) const { return to_array(model_.parameters().get(name)); }

  py::list recognize(const Array& images) const {
    if (images.ndim() != 3) throw DimensionError("recognize expects an array [B, H, W]");
    const auto& mc = cfg_.model;
    if (static_cast<std::size_t>(images.shape(1)) != mc.image_height ||
        static_cast<std::size_t>(images.shape(2)) != mc.image_width) {
      throw DimensionError("images must be " + std::to_string(mc.image_height) + "x" + std::to_string(mc.image_width));
    }
    const Tensor batch = reshape(to_tensor(images), {static_cast<std::size_t>(images.shape(0)), 1, mc.image_height,
                                                     mc.image_width});
    py::list out;
    std::vector<Recognition> results;
    {
      py::gil_scoped_release release;
      results = model_.recognize(batch);
    }
    for (const auto& r : results) out.append(recognition_dict(r));
    return out;
  }

 private:
  RunConfig cfg_;
  OtsNet model_;
};

}  // namespace

PYBIND11_MODULE(_otsnet, m) {
  m.doc() = "Scene text recognizer core";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<IndexError>(m, "IndexError", PyExc_IndexError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_RuntimeError);

  m.def(
      "config",
      [](const std::string& path, const py::dict& overrides) {
        py::dict out;
        for (const auto& e : describe_config(config_from(overrides, path))) out[py::str(e.key)] = e.value;
        return out;
      },
      py::arg("path") = "", py::arg("overrides") = py::dict(),
      "Effective configuration as a key -> value dict.");

  m.def(
      "synth_generate",
      [](std::size_t count, std::uint64_t seed, std::size_t min_length, std::size_t max_length, double noise_sigma,
         double rotation_deg) {
        SynthSpec spec;
        spec.count = count;
        spec.seed = seed;
        spec.min_length = min_length;
        spec.max_length = max_length;
        spec.noise = {noise_sigma, rotation_deg};
        py::list out;
        for (const auto& s : synth_generate(spec)) {
          out.append(py::make_tuple(image_array(s.image, spec.height, spec.width), s.text));
        }
        return out;
      },
      py::arg("count"), py::arg("seed") = 0, py::arg("min_length") = 1, py::arg("max_length") = 5,
      py::arg("noise_sigma") = 0.0, py::arg("rotation_deg") = 0.0,
      "Synthetic (image, text) pairs on 8x32 rasters.");

  m.def(
      "render_text",
      [](const std::string& text, std::size_t height, std::size_t width) {
        return image_array(render_text(text, height, width, 1.0), height, width);
      },
      py::arg("text"), py::arg("height") = 8, py::arg("width") = 32);

  m.def(
      "build_mask",
      [](std::size_t visual, std::size_t slots) {
        const AttentionMask mask = build_mask(visual, slots);
        py::array_t<bool> out({static_cast<py::ssize_t>(mask.rows), static_cast<py::ssize_t>(mask.cols)});
        bool* dst = out.mutable_data();
        for (std::size_t i = 0; i < mask.allowed.size(); ++i) dst[i] = mask.allowed[i] != 0;
        return out;
      },
      py::arg("visual"), py::arg("slots"), "Decoder visibility over [visual tokens | slots].");

  m.def(
      "gumbel_softmax",
      [](const Array& logits, double tau, std::optional<Array> noise) {
        return to_array(gumbel_softmax(to_tensor(logits), tau, noise ? to_tensor(*noise) : Tensor{}));
      },
      py::arg("logits"), py::arg("tau"), py::arg("noise") = py::none());

  m.def(
      "gumbel_noise",
      [](std::vector<std::size_t> shape, std::uint64_t seed, std::uint64_t step) {
        return to_array(gumbel_noise(Shape(shape.begin(), shape.end()), GumbelKey{seed, step}));
      },
      py::arg("shape"), py::arg("seed"), py::arg("step") = 0);

  m.def(
      "lambda_value",
      [](const std::vector<double>& q1, const std::vector<double>& k1, const std::vector<double>& q2,
         const std::vector<double>& k2, double lambda_init) { return lambda_value(q1, k1, q2, k2, lambda_init); },
      py::arg("q1"), py::arg("k1"), py::arg("q2"), py::arg("k2"), py::arg("lambda_init"));

  m.def("lr_schedule", &lr_schedule, py::arg("step"), py::arg("total_steps"), py::arg("warmup_steps"),
        py::arg("base_lr"));
  m.def("edit_distance", &edit_distance);
  m.def("char_similarity", &char_similarity);
  m.def(
      "score",
      [](const std::vector<std::string>& predictions, const std::vector<std::string>& labels) {
        const Metrics metrics = score(predictions, labels);
        return py::make_tuple(metrics.sequence_accuracy, metrics.character_accuracy);
      },
      "(sequence accuracy, character accuracy)");

  m.def(
      "gradcheck",
      [](std::uint64_t seed) {
        py::dict out;
        for (const auto& c : run_gradcheck_suite(ModelConfig{}, seed)) out[py::str(c.name)] = c.report.passed;
        return out;
      },
      py::arg("seed") = 0, "Runs the block and end-to-end gradient checks; name -> passed.");

  m.def(
      "run_command",
      [](const std::string& name, const std::string& config, std::optional<std::string> checkpoint,
         std::optional<std::uint64_t> seed, std::optional<std::string> out_dir, std::optional<std::string> suite,
         std::vector<std::string> inputs) {
        CommandOptions options;
        options.config_path = config;
        options.checkpoint = checkpoint;
        options.seed = seed;
        options.out = out_dir;
        options.suite = suite;
        options.inputs = std::move(inputs);
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = run_command(name, options, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("name"), py::arg("config") = "", py::arg("checkpoint") = py::none(), py::arg("seed") = py::none(),
      py::arg("out") = py::none(), py::arg("suite") = py::none(), py::arg("inputs") = std::vector<std::string>{},
      "Runs a CLI subcommand; returns (exit code, stdout, stderr).");

  py::class_<PyModel>(m, "Model")
      .def(py::init([](const std::string& path, const py::dict& overrides) {
             return std::make_unique<PyModel>(config_from(overrides, path));
           }),
           py::arg("config") = "", py::arg("overrides") = py::dict())
      .def("initialize", &PyModel::initialize, py::arg("seed"))
      .def("load", &PyModel::load, py::arg("checkpoint_dir"))
      .def("save", &PyModel::save, py::arg("checkpoint_dir"))
      .def("recognize", &PyModel::recognize, py::arg("images"))
      .def("parameter", &PyModel::parameter, py::arg("name"))
      .def_property_readonly("parameter_names", &PyModel::parameter_names)
      .def_property_readonly("parameter_count", &PyModel::parameter_count);
}
