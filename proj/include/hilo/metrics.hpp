// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hilo/fusion.hpp"
#include "hilo/scene.hpp"

namespace hilo {

/// Cutoff meaning "every prediction".
inline constexpr std::int64_t kAllPredictions = std::numeric_limits<std::int64_t>::max();

struct EvalConfig {
  std::vector<std::int64_t> ks{20, 50, 100};
  double iou_thr = 0.5;

  /// ks must be positive and strictly ascending.
  void validate() const;
};

struct MatchPair {
  std::int64_t rank = 0;      // position in the ranked prediction list
  std::int64_t gt_index = 0;  // triplet index in the scene

  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

/// Greedy rank-order matching: each prediction takes the first unmatched
/// ground truth with equal classes and both mask IoUs >= iou_thr.
std::vector<MatchPair> match_scene(std::span<const ScoredTriplet> preds, const SceneGraph& gt,
                                   double iou_thr = 0.5);

/// Fraction of ground truths matched by predictions ranked below k; empty when
/// the scene has no ground truth.
std::optional<double> recall_at_k(std::span<const MatchPair> matches, std::int64_t gt_count,
                                  std::int64_t k);

/// Mean over relations with at least one ground truth of the per-relation
/// recall. `match_ranks[r]` lists the prediction ranks that matched a
/// ground truth of relation r, pooled over the evaluation set.
std::optional<double> mean_recall_at_k(std::span<const std::vector<std::int64_t>> match_ranks,
                                       std::span<const std::int64_t> gt_per_relation,
                                       std::int64_t k);

struct EvalReport {
  std::vector<std::int64_t> ks;
  std::vector<double> recall;       // per k: mean over scenes with ground truth
  std::vector<double> mean_recall;  // per k
  std::vector<std::vector<std::optional<double>>> per_relation_recall;  // [k][relation]
  std::vector<std::int64_t> gt_per_relation;
  std::vector<std::int64_t> matched;  // per k, pooled matched ground truths
  std::int64_t scenes_evaluated = 0;
  std::int64_t gt_total = 0;
};

/// Scenes absent from `preds` count as empty predictions. Throws on predictions
/// for unknown scenes or mismatched dimensions.
EvalReport evaluate(const Dataset& gt, std::span<const ScenePredictions> preds,
                    const EvalConfig& config = {}, int threads = 1);

nlohmann::json to_json(const EvalReport& report, std::span<const std::string> relation_names);
std::string format_table(const EvalReport& report, std::span<const std::string> relation_names);

/// Parses "20,50,100"; "inf" or "all" stands for kAllPredictions.
std::vector<std::int64_t> parse_ks(const std::string& text);

}  // namespace hilo
