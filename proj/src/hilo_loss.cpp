// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#include "hilo/hilo_loss.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "hilo/error.hpp"

namespace hilo {

void SwapMap::validate(std::size_t size) const {
  std::set<std::int64_t> seen;
  for (const auto& [i, j] : transpositions) {
    if (i < 0 || j < 0 || i >= static_cast<std::int64_t>(size) ||
        j >= static_cast<std::int64_t>(size)) {
      throw Error("swap map index out of range for " + std::to_string(size) + " relations");
    }
    if (i == j) throw Error("swap map transposition (" + std::to_string(i) + ", " +
                            std::to_string(j) + ") is not a swap");
    if (!seen.insert(i).second || !seen.insert(j).second) {
      throw Error("swap map transpositions overlap");
    }
  }
}

std::int64_t SwapMap::image(std::int64_t i) const {
  for (const auto& [a, b] : transpositions) {
    if (a == i) return b;
    if (b == i) return a;
  }
  return i;
}

std::vector<double> rie(std::span<const double> p, const SwapMap& map) {
  map.validate(p.size());
  std::vector<double> out(p.begin(), p.end());
  for (const auto& [i, j] : map.transpositions) {
    std::swap(out[static_cast<std::size_t>(i)], out[static_cast<std::size_t>(j)]);
  }
  return out;
}

SwapMap pair_swap_map(std::int64_t hl_label, std::int64_t lh_label) {
  SwapMap m;
  if (hl_label != lh_label) m.transpositions.emplace_back(hl_label, lh_label);
  return m;
}

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(std::string(what) + ": shape mismatch (" + std::to_string(a) + " vs " +
                std::to_string(b) + ")");
  }
}

// |softmax(a) - softmax(b)|^2 with gradients through both softmaxes.
double softmax_distance(std::span<const double> a, std::span<const double> b,
                        std::vector<double>& grad_a, std::vector<double>& grad_b) {
  const auto sa = softmax(a);
  const auto sb = softmax(b);
  const auto d = mse(sa, sb);
  grad_a = softmax_backward(sa, d.grads[0]);
  grad_b = softmax_backward(sb, d.grads[1]);
  return d.value;
}

double sigmoid_distance(std::span<const double> a, std::span<const double> b,
                        std::vector<double>& grad_a, std::vector<double>& grad_b) {
  std::vector<double> sa(a.size()), sb(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa[i] = sigmoid(a[i]);
    sb[i] = sigmoid(b[i]);
  }
  const auto d = mse(sa, sb);
  grad_a.resize(a.size());
  grad_b.resize(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    grad_a[i] = d.grads[0][i] * sa[i] * (1.0 - sa[i]);
    grad_b[i] = d.grads[1][i] * sb[i] * (1.0 - sb[i]);
  }
  return d.value;
}

}  // namespace

LossReport subject_object_consistency(const PredictedTriplet& a, const PredictedTriplet& b) {
  if (!a.same_shape(b)) throw Error("subject_object_consistency: triplet shape mismatch");
  auto ga = a.zeros_like();
  auto gb = b.zeros_like();
  double value = 0.0;
  value += softmax_distance(a.subject_logits, b.subject_logits, ga.subject_logits,
                            gb.subject_logits);
  value += softmax_distance(a.object_logits, b.object_logits, ga.object_logits, gb.object_logits);
  value += sigmoid_distance(a.subject_mask_logits, b.subject_mask_logits, ga.subject_mask_logits,
                            gb.subject_mask_logits);
  value += sigmoid_distance(a.object_mask_logits, b.object_mask_logits, ga.object_mask_logits,
                            gb.object_mask_logits);
  LossReport out{value, {}};
  append_slots(ga, out.grads);
  append_slots(gb, out.grads);
  return out;
}

namespace {

struct DistanceParts {
  double first = 0.0;
  double second = 0.0;
  std::vector<double> grad_hl_probs;
  std::vector<double> grad_lh_probs;
  std::vector<double> hl_probs;
  std::vector<double> lh_probs;
};

DistanceParts distance_parts(std::span<const double> hl_logits, std::span<const double> lh_logits,
                             const SwapMap& map) {
  require_same_size(hl_logits.size(), lh_logits.size(), "hilo_distance");
  map.validate(hl_logits.size());
  DistanceParts d;
  d.hl_probs = softmax(hl_logits);
  d.lh_probs = softmax(lh_logits);
  const auto n = d.hl_probs.size();
  const auto lh_mapped = rie(d.lh_probs, map);
  const auto hl_mapped = rie(d.hl_probs, map);
  // first = |s_hl - P s_lh|^2, second = |P s_hl - s_lh|^2; P is symmetric.
  std::vector<double> r1(n), r2(n);
  for (std::size_t i = 0; i < n; ++i) {
    r1[i] = d.hl_probs[i] - lh_mapped[i];
    r2[i] = hl_mapped[i] - d.lh_probs[i];
    d.first += r1[i] * r1[i];
    d.second += r2[i] * r2[i];
  }
  const auto pr1 = rie(r1, map);
  const auto pr2 = rie(r2, map);
  d.grad_hl_probs.resize(n);
  d.grad_lh_probs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.grad_hl_probs[i] = 2.0 * r1[i] + 2.0 * pr2[i];
    d.grad_lh_probs[i] = -2.0 * pr1[i] - 2.0 * r2[i];
  }
  return d;
}

}  // namespace

std::pair<double, double> hilo_distance_terms(std::span<const double> hl_logits,
                                              std::span<const double> lh_logits,
                                              const SwapMap& map) {
  const auto d = distance_parts(hl_logits, lh_logits, map);
  return {d.first, d.second};
}

LossReport hilo_distance(std::span<const double> hl_logits, std::span<const double> lh_logits,
                         const SwapMap& map) {
  const auto d = distance_parts(hl_logits, lh_logits, map);
  return {d.first + d.second,
          {softmax_backward(d.hl_probs, d.grad_hl_probs),
           softmax_backward(d.lh_probs, d.grad_lh_probs)}};
}

LossReport relation_consistency(std::span<const double> hl_logits,
                                std::span<const double> lh_logits, const SwapMap& map,
                                double margin, bool use_rie) {
  if (margin < 0.0) throw Error("relation_consistency: margin must be nonnegative");
  LossReport dist;
  if (use_rie) {
    dist = hilo_distance(hl_logits, lh_logits, map);
  } else {
    require_same_size(hl_logits.size(), lh_logits.size(), "relation_consistency");
    map.validate(hl_logits.size());
    const auto s_hl = softmax(hl_logits);
    const auto s_lh = softmax(lh_logits);
    std::vector<double> keep(s_hl.size(), 1.0);
    for (const auto& [i, j] : map.transpositions) {
      keep[static_cast<std::size_t>(i)] = 0.0;
      keep[static_cast<std::size_t>(j)] = 0.0;
    }
    std::vector<double> g_hl(s_hl.size()), g_lh(s_hl.size());
    double value = 0.0;
    for (std::size_t i = 0; i < s_hl.size(); ++i) {
      const double r = (s_hl[i] - s_lh[i]) * keep[i];
      value += 2.0 * r * r;
      g_hl[i] = 4.0 * r * keep[i];
      g_lh[i] = -4.0 * r * keep[i];
    }
    dist = {value, {softmax_backward(s_hl, g_hl), softmax_backward(s_lh, g_lh)}};
  }
  if (dist.value - margin <= 0.0) {
    return {0.0,
            {std::vector<double>(hl_logits.size(), 0.0),
             std::vector<double>(lh_logits.size(), 0.0)}};
  }
  dist.value -= margin;
  return dist;
}

LossReport baseline_loss(std::span<const PredictedTriplet> preds, const SceneGraph& scene,
                         const Assignment& assignment, const LossWeights& weights) {
  const auto q_count = static_cast<std::int64_t>(preds.size());
  std::vector<std::int64_t> gt_of(static_cast<std::size_t>(q_count), -1);
  for (const auto& [q, g] : assignment.pairs) {
    if (q < 0 || q >= q_count || g < 0 || g >= static_cast<std::int64_t>(scene.triplets.size())) {
      throw Error("baseline_loss: assignment pair (" + std::to_string(q) + ", " +
                  std::to_string(g) + ") out of range for scene '" + scene.scene_id + "'");
    }
    gt_of[static_cast<std::size_t>(q)] = g;
  }

  LossReport out;
  out.grads.reserve(preds.size() * kTripletSlots);
  for (std::int64_t q = 0; q < q_count; ++q) {
    const auto& p = preds[static_cast<std::size_t>(q)];
    auto g = p.zeros_like();
    auto add_ce = [&](const std::vector<double>& logits, std::int64_t target, double w,
                      std::vector<double>& grad) {
      const auto ce = cross_entropy(logits, target);
      out.value += w * ce.value;
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += w * ce.grads[0][i];
    };
    auto add_mask = [&](const std::vector<double>& logits, std::span<const std::uint8_t> target,
                        std::vector<double>& grad) {
      const auto focal = focal_loss(logits, target, weights.focal);
      const auto dice = dice_loss(logits, target, weights.dice_smooth);
      out.value += weights.so_mask * (focal.value + dice.value);
      for (std::size_t i = 0; i < grad.size(); ++i) {
        grad[i] += weights.so_mask * (focal.grads[0][i] + dice.grads[0][i]);
      }
    };
    const auto gt_index = gt_of[static_cast<std::size_t>(q)];
    if (gt_index >= 0) {
      const auto& t = scene.triplets[static_cast<std::size_t>(gt_index)];
      const auto& subj = scene.objects.at(static_cast<std::size_t>(t.subject_idx));
      const auto& obj = scene.objects.at(static_cast<std::size_t>(t.object_idx));
      add_ce(p.subject_logits, subj.class_id, weights.so_cls, g.subject_logits);
      add_ce(p.object_logits, obj.class_id, weights.so_cls, g.object_logits);
      add_mask(p.subject_mask_logits, subj.mask.to_bits(), g.subject_mask_logits);
      add_mask(p.object_mask_logits, obj.mask.to_bits(), g.object_mask_logits);
      add_ce(p.relation_logits, t.relation_id, weights.rel_cls, g.relation_logits);
    } else {
      add_ce(p.subject_logits, p.padding_class(), weights.so_cls, g.subject_logits);
      add_ce(p.object_logits, p.padding_class(), weights.so_cls, g.object_logits);
      add_ce(p.relation_logits, p.padding_relation(), weights.rel_cls, g.relation_logits);
    }
    append_slots(g, out.grads);
  }
  return out;
}

TotalLoss total_loss(std::span<const PredictedTriplet> hl_preds,
                     std::span<const PredictedTriplet> lh_preds, const SceneGraph& hl_scene,
                     const SceneGraph& lh_scene, const Assignment& assign_hl,
                     const Assignment& assign_lh, const QueryCorrespondence& correspondence,
                     const ConsistencyOptions& options, const LossWeights& weights) {
  if (hl_scene.objects != lh_scene.objects ||
      hl_scene.triplets.size() != lh_scene.triplets.size()) {
    throw Error("total_loss: H-L and L-H data disagree on the objects or triplets of scene '" +
                hl_scene.scene_id + "'");
  }
  TotalLoss out;
  const auto base_hl = baseline_loss(hl_preds, hl_scene, assign_hl, weights);
  const auto base_lh = baseline_loss(lh_preds, lh_scene, assign_lh, weights);
  out.baseline_hl = base_hl.value;
  out.baseline_lh = base_lh.value;

  auto& grads = out.report.grads;
  grads = base_hl.grads;
  grads.insert(grads.end(), base_lh.grads.begin(), base_lh.grads.end());
  const auto lh_offset = hl_preds.size() * kTripletSlots;

  auto accumulate = [&](std::size_t slot, const std::vector<double>& g) {
    auto& dst = grads[slot];
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
  };

  for (const auto& pair : correspondence.pairs) {
    if (pair.hl_query < 0 || pair.hl_query >= static_cast<std::int64_t>(hl_preds.size()) ||
        pair.lh_query < 0 || pair.lh_query >= static_cast<std::int64_t>(lh_preds.size())) {
      throw Error("total_loss: correspondence references a missing query");
    }
    const auto hq = static_cast<std::size_t>(pair.hl_query);
    const auto lq = static_cast<std::size_t>(pair.lh_query);
    const auto obj = subject_object_consistency(hl_preds[hq], lh_preds[lq]);
    out.object_consistency += obj.value;
    for (std::size_t f = 0; f < kTripletSlots; ++f) {
      accumulate(hq * kTripletSlots + f, obj.grads[f]);
      accumulate(lh_offset + lq * kTripletSlots + f, obj.grads[kTripletSlots + f]);
    }
    const auto rel = relation_consistency(hl_preds[hq].relation_logits,
                                          lh_preds[lq].relation_logits,
                                          pair_swap_map(pair.hl_label, pair.lh_label),
                                          options.margin, options.use_rie);
    out.relation_consistency += rel.value;
    accumulate(hq * kTripletSlots + 2, rel.grads[0]);
    accumulate(lh_offset + lq * kTripletSlots + 2, rel.grads[1]);
  }
  out.report.value =
      out.baseline_hl + out.baseline_lh + out.object_consistency + out.relation_consistency;
  return out;
}

}  // namespace hilo
