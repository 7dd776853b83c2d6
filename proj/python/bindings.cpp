// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Structured data crosses the boundary as JSON text in the same formats the
// CLI reads and writes; the package's __init__ turns it into Python objects.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hilo/assignment.hpp"
#include "hilo/error.hpp"
#include "hilo/gradcheck.hpp"
#include "hilo/hilo_loss.hpp"
#include "hilo/metrics.hpp"
#include "hilo/relgen.hpp"
#include "hilo/toytrain.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace hilo {
namespace {

using Transpositions = std::vector<std::pair<std::int64_t, std::int64_t>>;

Dataset parse_dataset(const std::string& text) { return dataset_from_json(json::parse(text)); }

py::tuple report_tuple(const LossReport& r) {
  return py::make_tuple(r.value, r.grads.at(0), r.grads.at(1));
}

InferenceMode parse_mode(const std::string& s) {
  if (s == "fused") return InferenceMode::Fused;
  if (s == "hl") return InferenceMode::HLOnly;
  if (s == "lh") return InferenceMode::LHOnly;
  if (s == "average") return InferenceMode::AverageTensor;
  throw Error("unknown inference mode '" + s + "'");
}

}  // namespace
}  // namespace hilo

PYBIND11_MODULE(_core, m) {
  using namespace hilo;
  m.doc() = "Native core of hilo_sg";

  py::register_exception<Error>(m, "HiloError", PyExc_ValueError);
  // json::exception covers malformed text passed in from Python.
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def(
      "hungarian",
      [](const std::vector<std::vector<double>>& cost) {
        const auto rows = static_cast<std::int64_t>(cost.size());
        const auto cols = rows == 0 ? 0 : static_cast<std::int64_t>(cost[0].size());
        std::vector<double> flat;
        for (const auto& row : cost) {
          if (static_cast<std::int64_t>(row.size()) != cols) throw Error("hungarian: ragged cost matrix");
          flat.insert(flat.end(), row.begin(), row.end());
        }
        const auto a = hungarian(CostMatrix(rows, cols, std::move(flat)));
        return py::make_tuple(a.pairs, a.unmatched_queries);
      },
      py::arg("cost"), "Minimum-cost (query, gt) pairs and the unmatched queries.");

  m.def(
      "rie",
      [](const std::vector<double>& p, const Transpositions& t) { return rie(p, SwapMap{t}); },
      py::arg("p"), py::arg("transpositions"));
  m.def(
      "hilo_distance",
      [](const std::vector<double>& hl, const std::vector<double>& lh, const Transpositions& t) {
        return report_tuple(hilo_distance(hl, lh, SwapMap{t}));
      },
      py::arg("hl_logits"), py::arg("lh_logits"), py::arg("transpositions"),
      "(value, grad_hl, grad_lh)");
  m.def(
      "relation_consistency",
      [](const std::vector<double>& hl, const std::vector<double>& lh, const Transpositions& t,
         double margin, bool use_rie) {
        return report_tuple(relation_consistency(hl, lh, SwapMap{t}, margin, use_rie));
      },
      py::arg("hl_logits"), py::arg("lh_logits"), py::arg("transpositions"), py::arg("margin") = 0.5,
      py::arg("use_rie") = true);

  m.def(
      "augment",
      [](const std::string& dataset, const std::string& scores) {
        return to_json(augment_relations(parse_dataset(dataset),
                                         pair_scores_from_json(json::parse(scores))))
            .dump();
      },
      py::arg("dataset"), py::arg("scores"));
  m.def(
      "swap",
      [](const std::string& dataset, const std::string& direction, const std::string& mode) {
        const auto d = parse_dataset(dataset);
        return to_json(swap_relations(d, compute_frequency_table(d),
                                      {parse_swap_target(direction), parse_swap_strategy(mode)})
                           .data)
            .dump();
      },
      py::arg("dataset"), py::arg("direction"), py::arg("mode"));
  m.def(
      "synthesize",
      [](const std::string& config) {
        return to_json(generate_synthetic(synth_config_from_json(json::parse(config)))).dump();
      },
      py::arg("config") = "{}");
  m.def(
      "pair_scores",
      [](const std::string& dataset, std::uint64_t seed) {
        return to_json(synthesize_pair_scores(parse_dataset(dataset), seed)).dump();
      },
      py::arg("dataset"), py::arg("seed") = 0);

  m.def(
      "fuse",
      [](const std::string& hl, const std::string& lh, double iou_thr) {
        const auto a = predictions_from_json(json::parse(hl));
        const auto b = predictions_from_json(json::parse(lh));
        return to_json(fuse_scenes(a, b, iou_thr)).dump();
      },
      py::arg("hl"), py::arg("lh"), py::arg("iou_thr") = kDefaultFusionIou);
  m.def(
      "evaluate",
      [](const std::string& gt, const std::string& preds, const std::vector<std::int64_t>& ks,
         double iou_thr) {
        const auto d = parse_dataset(gt);
        const auto p = predictions_from_json(json::parse(preds));
        const EvalConfig cfg{ks, iou_thr};
        cfg.validate();
        return to_json(evaluate(d, p, cfg), d.relation_class_names).dump();
      },
      py::arg("gt"), py::arg("preds"), py::arg("ks") = std::vector<std::int64_t>{20, 50, 100},
      py::arg("iou_thr") = 0.5);

  m.def(
      "train",
      [](const std::string& dataset, const std::string& config) {
        const auto d = parse_dataset(dataset);
        const auto cfg = train_config_from_json(json::parse(config));
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(d, cfg);
        }
        return py::make_tuple(r.model.to_json().dump(), trace_csv(r.trace));
      },
      py::arg("dataset"), py::arg("config") = "{}", "(model JSON, trace CSV)");
  m.def(
      "predict",
      [](const std::string& model, const std::string& dataset, const std::string& mode) {
        const auto mdl = ToyModel::from_json(json::parse(model));
        return to_json(predict_dataset(mdl, parse_dataset(dataset), parse_mode(mode))).dump();
      },
      py::arg("model"), py::arg("dataset"), py::arg("mode") = "fused");

  m.def(
      "gradcheck",
      [](std::int64_t instances, std::uint64_t seed) {
        std::vector<py::tuple> out;
        for (const auto& r : run_gradient_suite(instances, seed)) {
          out.push_back(py::make_tuple(r.kernel, r.max_rel_error, r.passed));
        }
        return out;
      },
      py::arg("instances") = 100, py::arg("seed") = 0, "[(kernel, max_rel_error, passed)]");

  m.attr("ALL") = kAllPredictions;
}
