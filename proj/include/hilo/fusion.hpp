// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hilo/mask.hpp"
#include "hilo/prediction.hpp"

namespace hilo {

/// A post-processed triplet prediction.
struct ScoredTriplet {
  std::int64_t subject_class = 0;
  std::int64_t object_class = 0;
  std::int64_t relation_class = 0;
  double subject_score = 0.0;
  double object_score = 0.0;
  double relation_score = 0.0;
  BinaryMask subject_mask;
  BinaryMask object_mask;
  std::optional<double> combined_score;

  double product() const { return subject_score * object_score * relation_score; }
  friend bool operator==(const ScoredTriplet&, const ScoredTriplet&) = default;
};

/// Ranked predictions for one scene.
struct ScenePredictions {
  std::string scene_id;
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<ScoredTriplet> triplets;

  friend bool operator==(const ScenePredictions&, const ScenePredictions&) = default;
};

inline constexpr double kDefaultFusionIou = 0.5;

/// Same classes and both mask IoUs strictly above `iou_thr`.
bool duplicate_predicate(const ScoredTriplet& a, const ScoredTriplet& b, double iou_thr);

/// Merges two branches: sort by relation score, drop later duplicates of each
/// kept triplet, then rank by subject*object*relation score. Ties keep H-L
/// before L-H and the original order within a branch.
std::vector<ScoredTriplet> fuse(std::span<const ScoredTriplet> hl, std::span<const ScoredTriplet> lh,
                                double iou_thr = kDefaultFusionIou);

/// Index-wise mean of every logit tensor of the two branches.
std::vector<PredictedTriplet> average_tensor_fuse(std::span<const PredictedTriplet> hl,
                                                  std::span<const PredictedTriplet> lh);

/// Per-scene fuse over two prediction files; scenes are paired by id and a scene
/// missing from one side fuses with an empty list.
std::vector<ScenePredictions> fuse_scenes(std::span<const ScenePredictions> hl,
                                          std::span<const ScenePredictions> lh,
                                          double iou_thr = kDefaultFusionIou);

nlohmann::json to_json(const ScoredTriplet& t);
ScoredTriplet scored_triplet_from_json(const nlohmann::json& j, std::int64_t height,
                                       std::int64_t width);
nlohmann::json to_json(std::span<const ScenePredictions> preds);
std::vector<ScenePredictions> predictions_from_json(const nlohmann::json& j);
std::vector<ScenePredictions> load_predictions(const std::filesystem::path& path);
void save_predictions(std::span<const ScenePredictions> preds, const std::filesystem::path& path);

}  // namespace hilo
