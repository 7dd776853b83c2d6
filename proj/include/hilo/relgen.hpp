// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hilo/scene.hpp"

namespace hilo {

/// Scores from an external (biased) relation model for one subject-object pair.
/// `scores` has R+1 entries; the last one is the no-relation class.
struct PairScores {
  std::string scene_id;
  std::int64_t subject_idx = 0;
  std::int64_t object_idx = 0;
  std::vector<double> scores;
  friend bool operator==(const PairScores&, const PairScores&) = default;
};

enum class SwapTarget { HL, LH };
enum class SwapStrategy { Adjacent, Extreme };

struct SwapDirection {
  SwapTarget target = SwapTarget::HL;
  SwapStrategy strategy = SwapStrategy::Adjacent;
};

/// Where an output triplet came from. Triplet order is preserved by swapping, so
/// entry i of a scene describes triplet i both before and after.
struct SwapOrigin {
  std::int64_t original_relation = 0;
  std::int64_t rank = 0;        // position in the pair's frequency-sorted group
  std::int64_t group_size = 1;  // K
};

struct SwappedDataset {
  Dataset data;
  std::vector<std::vector<SwapOrigin>> origins;  // [scene][triplet]
};

/// Adds relations whose score beats the pair's threshold: the best labeled
/// relation's score, or the no-relation score for unlabeled pairs. Existing
/// triplets are kept as-is; new ones are appended per scene in score-list order.
Dataset augment_relations(const Dataset& dataset, const std::vector<PairScores>& scores);

/// Relabels multi-relation pairs toward lower (HL) or higher (LH) frequency.
SwappedDataset swap_relations(const Dataset& dataset, const RelationFrequencyTable& freq,
                              SwapDirection direction);

std::vector<PairScores> pair_scores_from_json(const nlohmann::json& j);
nlohmann::json to_json(const std::vector<PairScores>& scores);
std::vector<PairScores> load_pair_scores(const std::filesystem::path& path);

SwapTarget parse_swap_target(const std::string& s);
SwapStrategy parse_swap_strategy(const std::string& s);

}  // namespace hilo
