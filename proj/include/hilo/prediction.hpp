// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hilo/numerics.hpp"

namespace hilo {

/// Raw per-query outputs of one decoder branch. Class heads carry a trailing
/// padding entry (no-object / no-relation); mask logits are row-major grids.
struct PredictedTriplet {
  std::vector<double> subject_logits;       // C + 1
  std::vector<double> object_logits;        // C + 1
  std::vector<double> relation_logits;      // R + 1
  std::vector<double> subject_mask_logits;  // H * W
  std::vector<double> object_mask_logits;   // H * W

  std::int64_t padding_class() const {
    return static_cast<std::int64_t>(subject_logits.size()) - 1;
  }
  std::int64_t padding_relation() const {
    return static_cast<std::int64_t>(relation_logits.size()) - 1;
  }

  /// Same shape, all zeros.
  PredictedTriplet zeros_like() const;
  bool same_shape(const PredictedTriplet& other) const;
  void add_scaled(const PredictedTriplet& other, double scale);

  friend bool operator==(const PredictedTriplet&, const PredictedTriplet&) = default;
};

/// Number of gradient slots a PredictedTriplet occupies in a LossReport.
inline constexpr std::size_t kTripletSlots = 5;

/// Weights of the set-prediction loss and its kernels.
struct LossWeights {
  double so_cls = 1.0;
  double so_mask = 1.0;
  double rel_cls = 4.0;
  FocalParams focal{};
  double dice_smooth = 1.0;
};

/// Gradient slots in LossReport order: subject, object, relation, subject mask,
/// object mask; one group of five per triplet.
void append_slots(const PredictedTriplet& t, std::vector<std::vector<double>>& slots);
/// Rebuilds triplet-shaped gradients from `report.grads` starting at slot `first`.
std::vector<PredictedTriplet> triplets_from_slots(const LossReport& report, std::size_t first,
                                                  std::size_t count);

/// Concatenation of every logit of every triplet in slot order.
std::vector<double> flatten(std::span<const PredictedTriplet> triplets);
/// Inverse of flatten; shapes are taken from `like`.
std::vector<PredictedTriplet> unflatten(std::span<const double> values,
                                        std::span<const PredictedTriplet> like);

}  // namespace hilo
