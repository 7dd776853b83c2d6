// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#include "hilo/fusion.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "hilo/error.hpp"
#include "hilo/scene.hpp"

namespace hilo {

using nlohmann::json;

bool duplicate_predicate(const ScoredTriplet& a, const ScoredTriplet& b, double iou_thr) {
  if (!a.subject_mask.same_shape(b.subject_mask) || !a.object_mask.same_shape(b.object_mask)) {
    throw Error("duplicate_predicate: mask dimension mismatch");
  }
  if (a.subject_class != b.subject_class || a.object_class != b.object_class ||
      a.relation_class != b.relation_class) {
    return false;
  }
  return mask_iou(a.subject_mask, b.subject_mask) > iou_thr &&
         mask_iou(a.object_mask, b.object_mask) > iou_thr;
}

std::vector<ScoredTriplet> fuse(std::span<const ScoredTriplet> hl, std::span<const ScoredTriplet> lh,
                                double iou_thr) {
  std::vector<ScoredTriplet> merged(hl.begin(), hl.end());
  merged.insert(merged.end(), lh.begin(), lh.end());
  std::stable_sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) {
    return a.relation_score > b.relation_score;
  });

  std::vector<char> removed(merged.size(), 0);
  for (std::size_t i = 0; i < merged.size(); ++i) {
    if (removed[i]) continue;
    for (std::size_t j = i + 1; j < merged.size(); ++j) {
      if (!removed[j] && duplicate_predicate(merged[i], merged[j], iou_thr)) removed[j] = 1;
    }
  }
  std::vector<ScoredTriplet> out;
  out.reserve(merged.size());
  for (std::size_t i = 0; i < merged.size(); ++i) {
    if (removed[i]) continue;
    out.push_back(std::move(merged[i]));
    out.back().combined_score = out.back().product();
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return *a.combined_score > *b.combined_score;
  });
  return out;
}

namespace {

std::vector<double> mean(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = 0.5 * (a[i] + b[i]);
  return out;
}

}  // namespace

std::vector<PredictedTriplet> average_tensor_fuse(std::span<const PredictedTriplet> hl,
                                                  std::span<const PredictedTriplet> lh) {
  if (hl.size() != lh.size()) {
    throw Error("average_tensor_fuse: branches have " + std::to_string(hl.size()) + " and " +
                std::to_string(lh.size()) + " queries");
  }
  std::vector<PredictedTriplet> out;
  out.reserve(hl.size());
  for (std::size_t q = 0; q < hl.size(); ++q) {
    if (!hl[q].same_shape(lh[q])) {
      throw Error("average_tensor_fuse: shape mismatch at query " + std::to_string(q));
    }
    out.push_back({mean(hl[q].subject_logits, lh[q].subject_logits),
                   mean(hl[q].object_logits, lh[q].object_logits),
                   mean(hl[q].relation_logits, lh[q].relation_logits),
                   mean(hl[q].subject_mask_logits, lh[q].subject_mask_logits),
                   mean(hl[q].object_mask_logits, lh[q].object_mask_logits)});
  }
  return out;
}

std::vector<ScenePredictions> fuse_scenes(std::span<const ScenePredictions> hl,
                                          std::span<const ScenePredictions> lh, double iou_thr) {
  std::map<std::string, const ScenePredictions*> lh_by_id;
  for (const auto& s : lh) lh_by_id[s.scene_id] = &s;
  std::vector<ScenePredictions> out;
  std::set<std::string> done;
  for (const auto& s : hl) {
    const auto it = lh_by_id.find(s.scene_id);
    ScenePredictions fused{s.scene_id, s.height, s.width, {}};
    if (it != lh_by_id.end()) {
      if (it->second->height != s.height || it->second->width != s.width) {
        throw Error("fuse: scene '" + s.scene_id + "' has different dimensions per branch");
      }
      fused.triplets = fuse(s.triplets, it->second->triplets, iou_thr);
    } else {
      fused.triplets = fuse(s.triplets, {}, iou_thr);
    }
    done.insert(s.scene_id);
    out.push_back(std::move(fused));
  }
  for (const auto& s : lh) {
    if (done.contains(s.scene_id)) continue;
    out.push_back({s.scene_id, s.height, s.width, fuse({}, s.triplets, iou_thr)});
  }
  return out;
}

json to_json(const ScoredTriplet& t) {
  json j = {{"subject_class", t.subject_class},   {"object_class", t.object_class},
            {"relation_class", t.relation_class}, {"subject_score", t.subject_score},
            {"object_score", t.object_score},     {"relation_score", t.relation_score},
            {"subject_rle", t.subject_mask.runs()}, {"object_rle", t.object_mask.runs()}};
  if (t.combined_score) j["combined_score"] = *t.combined_score;
  return j;
}

ScoredTriplet scored_triplet_from_json(const json& j, std::int64_t height, std::int64_t width) {
  try {
    ScoredTriplet t;
    t.subject_class = j.at("subject_class").get<std::int64_t>();
    t.object_class = j.at("object_class").get<std::int64_t>();
    t.relation_class = j.at("relation_class").get<std::int64_t>();
    t.subject_score = j.at("subject_score").get<double>();
    t.object_score = j.at("object_score").get<double>();
    t.relation_score = j.at("relation_score").get<double>();
    for (double s : {t.subject_score, t.object_score, t.relation_score}) {
      if (!(s >= 0.0 && s <= 1.0)) throw Error("scores must lie in [0, 1]");
    }
    t.subject_mask = BinaryMask(height, width, j.at("subject_rle").get<std::vector<std::int64_t>>());
    t.object_mask = BinaryMask(height, width, j.at("object_rle").get<std::vector<std::int64_t>>());
    if (j.contains("combined_score")) t.combined_score = j.at("combined_score").get<double>();
    return t;
  } catch (const json::exception& e) {
    throw ParseError(std::string("scored triplet: ") + e.what());
  }
}

json to_json(std::span<const ScenePredictions> preds) {
  json out = json::array();
  for (const auto& s : preds) {
    json triplets = json::array();
    for (const auto& t : s.triplets) triplets.push_back(to_json(t));
    out.push_back({{"scene_id", s.scene_id},
                   {"height", s.height},
                   {"width", s.width},
                   {"triplets", std::move(triplets)}});
  }
  return out;
}

std::vector<ScenePredictions> predictions_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("predictions: expected a JSON array of scenes");
  std::vector<ScenePredictions> out;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    ScenePredictions s;
    try {
      s.scene_id = e.at("scene_id").get<std::string>();
      s.height = e.at("height").get<std::int64_t>();
      s.width = e.at("width").get<std::int64_t>();
    } catch (const json::exception& ex) {
      throw ParseError("predictions[" + std::to_string(i) + "]: " + ex.what());
    }
    if (!ids.insert(s.scene_id).second) {
      throw ParseError("predictions: duplicate scene '" + s.scene_id + "'");
    }
    const auto triplets = e.value("triplets", json::array());
    for (std::size_t k = 0; k < triplets.size(); ++k) {
      try {
        s.triplets.push_back(scored_triplet_from_json(triplets[k], s.height, s.width));
      } catch (const Error& ex) {
        throw ParseError("predictions scene '" + s.scene_id + "' triplets[" + std::to_string(k) +
                         "]: " + ex.what());
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ScenePredictions> load_predictions(const std::filesystem::path& path) {
  return predictions_from_json(read_json_file(path));
}

void save_predictions(std::span<const ScenePredictions> preds, const std::filesystem::path& path) {
  write_text_file(path, canonical_dump(to_json(preds)));
}

}  // namespace hilo
