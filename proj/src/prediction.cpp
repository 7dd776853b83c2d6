// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#include "hilo/prediction.hpp"

#include <algorithm>
#include <array>

#include "hilo/error.hpp"

namespace hilo {
namespace {

template <typename T>
auto fields(T& t) {
  return std::array{&t.subject_logits, &t.object_logits, &t.relation_logits,
                    &t.subject_mask_logits, &t.object_mask_logits};
}

}  // namespace

PredictedTriplet PredictedTriplet::zeros_like() const {
  PredictedTriplet z;
  z.subject_logits.assign(subject_logits.size(), 0.0);
  z.object_logits.assign(object_logits.size(), 0.0);
  z.relation_logits.assign(relation_logits.size(), 0.0);
  z.subject_mask_logits.assign(subject_mask_logits.size(), 0.0);
  z.object_mask_logits.assign(object_mask_logits.size(), 0.0);
  return z;
}

bool PredictedTriplet::same_shape(const PredictedTriplet& other) const {
  return subject_logits.size() == other.subject_logits.size() &&
         object_logits.size() == other.object_logits.size() &&
         relation_logits.size() == other.relation_logits.size() &&
         subject_mask_logits.size() == other.subject_mask_logits.size() &&
         object_mask_logits.size() == other.object_mask_logits.size();
}

void PredictedTriplet::add_scaled(const PredictedTriplet& other, double scale) {
  if (!same_shape(other)) throw Error("add_scaled: triplet shape mismatch");
  auto dst = fields(*this);
  auto src = fields(other);
  for (std::size_t f = 0; f < dst.size(); ++f) {
    for (std::size_t i = 0; i < dst[f]->size(); ++i) (*dst[f])[i] += scale * (*src[f])[i];
  }
}

void append_slots(const PredictedTriplet& t, std::vector<std::vector<double>>& slots) {
  for (auto* f : fields(t)) slots.push_back(*f);
}

std::vector<PredictedTriplet> triplets_from_slots(const LossReport& report, std::size_t first,
                                                  std::size_t count) {
  if (first + count * kTripletSlots > report.grads.size()) {
    throw Error("triplets_from_slots: report has too few gradient slots");
  }
  std::vector<PredictedTriplet> out(count);
  for (std::size_t q = 0; q < count; ++q) {
    auto dst = fields(out[q]);
    for (std::size_t f = 0; f < kTripletSlots; ++f) {
      *dst[f] = report.grads[first + q * kTripletSlots + f];
    }
  }
  return out;
}

std::vector<double> flatten(std::span<const PredictedTriplet> triplets) {
  std::vector<double> out;
  for (const auto& t : triplets) {
    for (auto* f : fields(t)) out.insert(out.end(), f->begin(), f->end());
  }
  return out;
}

std::vector<PredictedTriplet> unflatten(std::span<const double> values,
                                        std::span<const PredictedTriplet> like) {
  std::vector<PredictedTriplet> out(like.begin(), like.end());
  std::size_t pos = 0;
  for (auto& t : out) {
    for (auto* f : fields(t)) {
      if (pos + f->size() > values.size()) throw Error("unflatten: too few values");
      std::copy(values.begin() + static_cast<std::ptrdiff_t>(pos),
                values.begin() + static_cast<std::ptrdiff_t>(pos + f->size()), f->begin());
      pos += f->size();
    }
  }
  if (pos != values.size()) throw Error("unflatten: too many values");
  return out;
}

}  // namespace hilo
