// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

// Python bindings. Structured values (configs, reports, histories) cross the
// boundary as JSON text; the pure-Python wrapper decodes them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mfn/error.hpp"
#include "mfn/experiment.hpp"
#include "mfn/serialization.hpp"
#include "mfn/synth.hpp"
#include "mfn/training.hpp"

PYBIND11_MAKE_OPAQUE(mfn::Dataset)

namespace py = pybind11;
using namespace mfn;

namespace {

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(e.what());
  }
}

std::string to_jsonl(const Dataset& data) {
  std::ostringstream out;
  write_dataset(data, out);
  return out.str();
}

Dataset from_jsonl(const std::string& text) {
  std::istringstream in(text);
  return read_dataset(in);
}

/// Config plus parameters, the unit that trains, predicts and checkpoints.
struct Model {
  MfnConfig config;
  MfnParams params;
  std::uint64_t seed = 0;

  Model(const std::string& config_json, std::uint64_t s)
      : config(mfn_config_from_json(parse(config_json))), params(init_params(config, s)), seed(s) {}
  Model(MfnConfig c, MfnParams p, std::uint64_t s) : config(std::move(c)), params(std::move(p)), seed(s) {}

  std::vector<std::vector<double>> features(const Dataset& data) const {
    std::vector<std::vector<double>> out;
    for (const auto& seq : data) out.push_back(mfn_forward(params, config, seq, false).features.data);
    return out;
  }

  std::vector<std::vector<double>> predict(const Dataset& data, std::size_t threads) const {
    std::vector<std::vector<double>> out;
    for (const Tensor& t : predict_all(config, params, data, threads)) out.push_back(t.data);
    return out;
  }
};

}  // namespace

PYBIND11_MODULE(_mfn, m) {
  m.doc() = "Memory Fusion Network core (C++)";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", error.ptr());
  py::register_exception<DomainError>(m, "DomainError", error.ptr());
  py::register_exception<StateError>(m, "StateError", error.ptr());
  py::register_exception<NumericError>(m, "NumericError", error.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", error.ptr());
  py::register_exception<AlignmentError>(m, "AlignmentError", error.ptr());
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_static("load", [](const std::string& path) { return load_dataset(path); })
      .def_static("from_jsonl", &from_jsonl)
      .def("save", [](const Dataset& d, const std::string& path) { save_dataset(d, path); })
      .def("to_jsonl", &to_jsonl)
      .def("__len__", [](const Dataset& d) { return d.size(); })
      .def("ids",
           [](const Dataset& d) {
             std::vector<std::string> ids;
             for (const auto& s : d) ids.push_back(s.id);
             return ids;
           })
      .def("labels",
           [](const Dataset& d) {
             std::vector<double> labels;
             for (const auto& s : d) labels.push_back(s.label);
             return labels;
           })
      .def("select", [](const Dataset& d, const std::vector<std::string>& ids) { return select(d, ids); });

  m.def("default_config", [] { return to_json(MfnConfig::default_config()).dump(); });
  m.def("tiny_config", [] { return to_json(MfnConfig::tiny_config()).dump(); });
  m.def(
      "config_for",
      [](const Dataset& data, std::size_t hidden, std::size_t memory, const std::string& task,
         const std::string& variant) {
        return to_json(config_for(data, hidden, memory, parse_task(task, data), Variant::parse(variant))).dump();
      },
      py::arg("data"), py::arg("hidden_dim"), py::arg("memory_dim"), py::arg("task") = "auto",
      py::arg("variant") = "full");
  m.def("with_variant", [](const std::string& config_json, const std::string& variant) {
    return to_json(mfn_config_from_json(parse(config_json)).with_variant(Variant::parse(variant))).dump();
  });
  m.def("ablation_variants", [](const std::string& config_json) {
    std::vector<std::string> names;
    for (const Variant& v : ablation_variants(mfn_config_from_json(parse(config_json)))) names.push_back(v.name());
    return names;
  });
  m.def("param_count", [](const std::string& config_json) {
    const ParamCount c = param_count(mfn_config_from_json(parse(config_json)));
    return Json{{"lstm", c.lstm}, {"attention", c.attention}, {"memory", c.memory}, {"head", c.head},
                {"total", c.total()}}
        .dump();
  });

  m.def(
      "synth",
      [](const std::string& synth_json) {
        const SynthDataset s = gen_crossview_task(synth_config_from_json(parse(synth_json)));
        std::ostringstream latents;
        write_latents(s.latents, latents);
        return std::make_pair(s.data, latents.str());
      },
      py::arg("config_json") = "{}");
  m.def("split", [](const Dataset& data, std::array<double, 3> ratios, std::uint64_t seed) {
    return to_json(split_by_group(data, ratios, seed)).dump();
  });

  py::class_<Model>(m, "Model")
      .def(py::init<const std::string&, std::uint64_t>(), py::arg("config_json"), py::arg("seed") = 0)
      .def_static("load",
                  [](const std::string& path) {
                    Checkpoint ck = load_checkpoint(path);
                    return Model(std::move(ck.config), std::move(ck.params), ck.seed);
                  })
      .def("save",
           [](const Model& model, const std::string& path) {
             save_checkpoint({model.config, model.params, model.seed, Json::object()}, path);
           })
      .def("config_json", [](const Model& model) { return to_json(model.config).dump(); })
      .def_readonly("seed", &Model::seed)
      .def("parameter_count", [](const Model& model) { return model.params.parameter_count(); })
      .def("features", &Model::features, py::call_guard<py::gil_scoped_release>())
      .def("predict", &Model::predict, py::arg("data"), py::arg("threads") = 1,
           py::call_guard<py::gil_scoped_release>())
      .def(
          "evaluate",
          [](const Model& model, const Dataset& data, std::size_t threads) {
            return to_json(evaluate(model.config, model.params, data, threads)).dump();
          },
          py::arg("data"), py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>())
      .def(
          "train",
          [](Model& model, const Dataset& train_set, const Dataset& valid_set, const std::string& train_json) {
            TrainConfig tc = train_config_from_json(parse(train_json));
            TrainResult r = train(model.config, model.params, train_set, valid_set, tc);
            model.params = std::move(r.best_params);
            return to_json(r.history).dump();
          },
          py::arg("train_set"), py::arg("valid_set"), py::arg("train_config_json") = "{}",
          py::call_guard<py::gil_scoped_release>())
      .def(
          "grad_check",
          [](const Model& model, const Dataset& data, std::size_t index, double eps) {
            if (index >= data.size()) throw DomainError("sequence index out of range");
            const GradCheckResult r = grad_check(model.config, model.params, data[index], eps);
            return Json{{"max_relative_error", r.max_relative_error},
                        {"worst_parameter", r.worst_parameter},
                        {"worst_index", r.worst_index},
                        {"analytic", r.analytic},
                        {"numeric", r.numeric},
                        {"entries", r.entries}}
                .dump();
          },
          py::arg("data"), py::arg("index") = 0, py::arg("eps") = 1e-5, py::call_guard<py::gil_scoped_release>())
      .def(
          "bench",
          [](const Model& model, const Dataset& data, std::size_t repeats, std::size_t threads) {
            const BenchResult b = bench(model.config, model.params, data, repeats, threads);
            return Json{{"sequences", b.sequences},
                        {"repeats", b.repeats},
                        {"threads", b.threads},
                        {"seconds", b.seconds},
                        {"inferences_per_second", b.inferences_per_second}}
                .dump();
          },
          py::arg("data"), py::arg("repeats") = 3, py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());
}
