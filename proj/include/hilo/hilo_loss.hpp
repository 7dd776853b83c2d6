// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "hilo/assignment.hpp"
#include "hilo/numerics.hpp"
#include "hilo/prediction.hpp"
#include "hilo/scene.hpp"

namespace hilo {

/// Disjoint transpositions of relation indices.
struct SwapMap {
  std::vector<std::pair<std::int64_t, std::int64_t>> transpositions;

  /// Throws unless every index is < size, i != j, and no index repeats.
  void validate(std::size_t size) const;
  /// Mirror of index i under the map.
  std::int64_t image(std::int64_t i) const;
  bool empty() const { return transpositions.empty(); }
};

/// Relational index exchange: `p` with each transposition's entries swapped.
std::vector<double> rie(std::span<const double> p, const SwapMap& map);

/// Squared distance between softmax class and sigmoid mask outputs of two
/// corresponding queries. Grads: 5 slots for `a`, then 5 for `b`; the relation
/// slots are zero.
LossReport subject_object_consistency(const PredictedTriplet& a, const PredictedTriplet& b);

/// The two addends of the symmetric relation distance.
std::pair<double, double> hilo_distance_terms(std::span<const double> hl_logits,
                                              std::span<const double> lh_logits,
                                              const SwapMap& map);

/// |s(hl) - RIE(s(lh))|^2 + |RIE(s(hl)) - s(lh)|^2 with s = softmax.
/// Grads: {d/d hl_logits, d/d lh_logits}.
LossReport hilo_distance(std::span<const double> hl_logits, std::span<const double> lh_logits,
                         const SwapMap& map);

/// Hinge max(D - margin, 0). With use_rie, D is the symmetric relation
/// distance; otherwise D = 2 |(s(hl) - s(lh)) * u|^2 where u zeroes every index
/// touched by `map`.
LossReport relation_consistency(std::span<const double> hl_logits,
                                std::span<const double> lh_logits, const SwapMap& map,
                                double margin, bool use_rie);

/// Weighted set-prediction loss of one branch on one scene. Matched queries are
/// supervised by their ground truth, the rest toward the padding classes.
/// Grads: 5 slots per query.
LossReport baseline_loss(std::span<const PredictedTriplet> preds, const SceneGraph& scene,
                         const Assignment& assignment, const LossWeights& weights = {});

struct ConsistencyOptions {
  double margin = 0.5;
  bool use_rie = true;
};

struct TotalLoss {
  LossReport report;  // grads: 5 slots per H-L query, then 5 per L-H query
  double baseline_hl = 0.0;
  double baseline_lh = 0.0;
  double object_consistency = 0.0;
  double relation_consistency = 0.0;
};

/// Baseline losses of both branches plus the consistency terms over every
/// corresponding query pair. `hl_scene` and `lh_scene` are the same scene under
/// the H-L and L-H relabelings.
TotalLoss total_loss(std::span<const PredictedTriplet> hl_preds,
                     std::span<const PredictedTriplet> lh_preds, const SceneGraph& hl_scene,
                     const SceneGraph& lh_scene, const Assignment& assign_hl,
                     const Assignment& assign_lh, const QueryCorrespondence& correspondence,
                     const ConsistencyOptions& options = {}, const LossWeights& weights = {});

/// SwapMap for a matched pair: the single transposition of its two labels, or
/// the identity when they agree.
SwapMap pair_swap_map(std::int64_t hl_label, std::int64_t lh_label);

}  // namespace hilo
