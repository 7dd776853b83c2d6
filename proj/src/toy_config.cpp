// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#include <set>

#include "hilo/error.hpp"
#include "hilo/toytrain.hpp"

namespace hilo {
namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const char* where) {
  if (!j.is_object()) throw ParseError(std::string(where) + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ParseError(std::string(where) + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out, const char* where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string(where) + ": '" + key + "' has the wrong type");
  }
}

}  // namespace

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  constexpr const char* where = "synth config";
  reject_unknown(j,
                 {"num_scenes", "grid_size", "num_object_classes", "num_relation_classes",
                  "zipf_exponent", "multi_relation_fraction", "seed", "objects_per_scene",
                  "pairs_per_scene", "scene_prefix"},
                 where);
  SynthConfig c;
  read(j, "num_scenes", c.num_scenes, where);
  read(j, "grid_size", c.grid_size, where);
  read(j, "num_object_classes", c.num_object_classes, where);
  read(j, "num_relation_classes", c.num_relation_classes, where);
  read(j, "zipf_exponent", c.zipf_exponent, where);
  read(j, "multi_relation_fraction", c.multi_relation_fraction, where);
  read(j, "seed", c.seed, where);
  read(j, "objects_per_scene", c.objects_per_scene, where);
  read(j, "pairs_per_scene", c.pairs_per_scene, where);
  read(j, "scene_prefix", c.scene_prefix, where);
  c.validate();
  return c;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  constexpr const char* where = "train config";
  reject_unknown(j,
                 {"steps", "learning_rate", "margin", "use_rie", "swap_mode", "num_queries",
                  "hidden_dim", "init_scale", "seed", "loss_weights"},
                 where);
  TrainConfig c;
  read(j, "steps", c.steps, where);
  read(j, "learning_rate", c.learning_rate, where);
  read(j, "margin", c.margin, where);
  read(j, "use_rie", c.use_rie, where);
  std::string mode = to_string(c.swap_mode);
  read(j, "swap_mode", mode, where);
  c.swap_mode = parse_swap_mode(mode);
  read(j, "num_queries", c.model.num_queries, where);
  read(j, "hidden_dim", c.model.hidden_dim, where);
  read(j, "init_scale", c.model.init_scale, where);
  read(j, "seed", c.seed, where);
  if (j.contains("loss_weights")) {
    const auto& w = j.at("loss_weights");
    constexpr const char* wwhere = "train config loss_weights";
    reject_unknown(w, {"so_cls", "so_mask", "rel_cls", "focal_gamma", "focal_alpha", "dice_smooth"},
                   wwhere);
    read(w, "so_cls", c.weights.so_cls, wwhere);
    read(w, "so_mask", c.weights.so_mask, wwhere);
    read(w, "rel_cls", c.weights.rel_cls, wwhere);
    read(w, "focal_gamma", c.weights.focal.gamma, wwhere);
    read(w, "focal_alpha", c.weights.focal.alpha, wwhere);
    read(w, "dice_smooth", c.weights.dice_smooth, wwhere);
  }
  if (c.steps < 0 || c.learning_rate < 0.0 || c.margin < 0.0) {
    throw ParseError("train config: steps, learning_rate and margin must be non-negative");
  }
  return c;
}

EvalConfig eval_config_from_json(const nlohmann::json& j) {
  constexpr const char* where = "eval config";
  reject_unknown(j, {"ks", "iou_thr"}, where);
  EvalConfig c;
  if (j.contains("ks")) {
    const auto& ks = j.at("ks");
    if (!ks.is_array()) throw ParseError("eval config: 'ks' must be an array");
    c.ks.clear();
    for (const auto& k : ks) {
      if (k.is_string() && (k == "all" || k == "inf")) {
        c.ks.push_back(kAllPredictions);
      } else if (k.is_number_integer()) {
        c.ks.push_back(k.get<std::int64_t>());
      } else {
        throw ParseError("eval config: entries of 'ks' must be integers or \"all\"");
      }
    }
  }
  read(j, "iou_thr", c.iou_thr, where);
  c.validate();
  return c;
}

nlohmann::json to_json(const SynthConfig& c) {
  return {{"num_scenes", c.num_scenes},
          {"grid_size", c.grid_size},
          {"num_object_classes", c.num_object_classes},
          {"num_relation_classes", c.num_relation_classes},
          {"zipf_exponent", c.zipf_exponent},
          {"multi_relation_fraction", c.multi_relation_fraction},
          {"seed", c.seed},
          {"objects_per_scene", c.objects_per_scene},
          {"pairs_per_scene", c.pairs_per_scene},
          {"scene_prefix", c.scene_prefix}};
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"steps", c.steps},
          {"learning_rate", c.learning_rate},
          {"margin", c.margin},
          {"use_rie", c.use_rie},
          {"swap_mode", to_string(c.swap_mode)},
          {"num_queries", c.model.num_queries},
          {"hidden_dim", c.model.hidden_dim},
          {"init_scale", c.model.init_scale},
          {"seed", c.seed},
          {"loss_weights",
           {{"so_cls", c.weights.so_cls},
            {"so_mask", c.weights.so_mask},
            {"rel_cls", c.weights.rel_cls},
            {"focal_gamma", c.weights.focal.gamma},
            {"focal_alpha", c.weights.focal.alpha},
            {"dice_smooth", c.weights.dice_smooth}}}};
}

}  // namespace hilo
