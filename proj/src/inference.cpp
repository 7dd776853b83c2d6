// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>

#include "hilo/error.hpp"
#include "hilo/parallel.hpp"
#include "hilo/toytrain.hpp"

namespace hilo {
namespace {

std::pair<std::int64_t, double> argmax_prob(std::span<const double> logits) {
  const auto p = softmax(logits);
  const auto it = std::max_element(p.begin(), p.end());
  return {static_cast<std::int64_t>(it - p.begin()), *it};
}

BinaryMask binarize(std::span<const double> logits, std::int64_t height, std::int64_t width) {
  if (static_cast<std::int64_t>(logits.size()) != height * width) {
    throw Error("mask logits do not match the " + std::to_string(height) + "x" +
                std::to_string(width) + " grid");
  }
  std::vector<std::uint8_t> bits(logits.size());
  // sigmoid(x) >= 0.5 exactly when x >= 0
  for (std::size_t i = 0; i < logits.size(); ++i) bits[i] = logits[i] >= 0.0 ? 1 : 0;
  return BinaryMask::from_bits(height, width, bits);
}

}  // namespace

std::vector<ScoredTriplet> postprocess(std::span<const PredictedTriplet> preds,
                                       std::int64_t height, std::int64_t width) {
  std::vector<ScoredTriplet> out;
  for (const auto& p : preds) {
    const auto [subj, subj_p] = argmax_prob(p.subject_logits);
    const auto [obj, obj_p] = argmax_prob(p.object_logits);
    const auto [rel, rel_p] = argmax_prob(p.relation_logits);
    if (subj == p.padding_class() || obj == p.padding_class() || rel == p.padding_relation()) {
      continue;
    }
    ScoredTriplet t;
    t.subject_class = subj;
    t.object_class = obj;
    t.relation_class = rel;
    t.subject_score = subj_p;
    t.object_score = obj_p;
    t.relation_score = rel_p;
    t.subject_mask = binarize(p.subject_mask_logits, height, width);
    t.object_mask = binarize(p.object_mask_logits, height, width);
    out.push_back(std::move(t));
  }
  return out;
}

BranchPredictions predict(const ToyModel& model, const SceneGraph& scene) {
  const auto enc = model.encode(scene);
  return {postprocess(model.forward(Branch::HL, enc), scene.height, scene.width),
          postprocess(model.forward(Branch::LH, enc), scene.height, scene.width)};
}

std::vector<ScoredTriplet> rank_single(std::span<const ScoredTriplet> preds, double iou_thr) {
  return fuse(preds, {}, iou_thr);
}

std::vector<ScenePredictions> predict_dataset(const ToyModel& model, const Dataset& dataset,
                                              InferenceMode mode, int threads, double iou_thr) {
  std::vector<ScenePredictions> out(dataset.scenes.size());
  parallel_for(dataset.scenes.size(), threads, [&](std::size_t i) {
    const auto& scene = dataset.scenes[i];
    auto& sp = out[i];
    sp.scene_id = scene.scene_id;
    sp.height = scene.height;
    sp.width = scene.width;
    const auto enc = model.encode(scene);
    const auto hl = model.forward(Branch::HL, enc);
    const auto lh = model.forward(Branch::LH, enc);
    switch (mode) {
      case InferenceMode::Fused:
        sp.triplets = fuse(postprocess(hl, scene.height, scene.width),
                           postprocess(lh, scene.height, scene.width), iou_thr);
        break;
      case InferenceMode::HLOnly:
        sp.triplets = rank_single(postprocess(hl, scene.height, scene.width), iou_thr);
        break;
      case InferenceMode::LHOnly:
        sp.triplets = rank_single(postprocess(lh, scene.height, scene.width), iou_thr);
        break;
      case InferenceMode::AverageTensor:
        sp.triplets = rank_single(
            postprocess(average_tensor_fuse(hl, lh), scene.height, scene.width), iou_thr);
        break;
    }
  });
  return out;
}

void snap_to_gt_masks(std::vector<ScoredTriplet>& preds, const SceneGraph& scene) {
  const auto snap = [&](const BinaryMask& m) {
    std::int64_t best = 0;
    const BinaryMask* found = nullptr;
    for (const auto& obj : scene.objects) {
      const auto overlap = intersection_area(m, obj.mask);
      if (overlap > best) {
        best = overlap;
        found = &obj.mask;
      }
    }
    return found ? *found : BinaryMask::empty(scene.height, scene.width);
  };
  for (auto& p : preds) {
    p.subject_mask = snap(p.subject_mask);
    p.object_mask = snap(p.object_mask);
  }
}

double low_frequency_mass(const ToyModel& model, Branch b, const Dataset& dataset,
                          const RelationFrequencyTable& freq) {
  const auto r = model.num_relation_classes();
  if (freq.size() != r) throw Error("frequency table does not match the model's relation count");
  const auto order = freq.descending_order();
  const auto half = static_cast<std::size_t>(r / 2);
  const std::vector<std::int64_t> rare(order.end() - static_cast<std::ptrdiff_t>(half), order.end());
  double total = 0.0;
  std::int64_t count = 0;
  for (const auto& scene : dataset.scenes) {
    for (const auto& t : model.forward(b, scene)) {
      const std::span<const double> real(t.relation_logits.data(), static_cast<std::size_t>(r));
      const auto p = softmax(real);
      for (auto k : rare) total += p[static_cast<std::size_t>(k)];
      ++count;
    }
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

}  // namespace hilo
