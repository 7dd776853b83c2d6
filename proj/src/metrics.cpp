// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#include "hilo/metrics.hpp"

#include <cstdio>
#include <map>
#include <sstream>

#include "hilo/error.hpp"
#include "hilo/parallel.hpp"

namespace hilo {

using nlohmann::json;

void EvalConfig::validate() const {
  if (ks.empty()) throw Error("eval: at least one K is required");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] <= 0) throw Error("eval: K must be positive");
    if (i > 0 && ks[i] <= ks[i - 1]) throw Error("eval: K values must be strictly ascending");
  }
  if (!(iou_thr >= 0.0 && iou_thr <= 1.0)) throw Error("eval: iou threshold must lie in [0, 1]");
}

std::vector<MatchPair> match_scene(std::span<const ScoredTriplet> preds, const SceneGraph& gt,
                                   double iou_thr) {
  std::vector<char> taken(gt.triplets.size(), 0);
  std::vector<MatchPair> out;
  for (std::size_t rank = 0; rank < preds.size(); ++rank) {
    const auto& p = preds[rank];
    for (std::size_t g = 0; g < gt.triplets.size(); ++g) {
      if (taken[g]) continue;
      const auto& t = gt.triplets[g];
      const auto& subj = gt.objects.at(static_cast<std::size_t>(t.subject_idx));
      const auto& obj = gt.objects.at(static_cast<std::size_t>(t.object_idx));
      if (p.subject_class != subj.class_id || p.object_class != obj.class_id ||
          p.relation_class != t.relation_id) {
        continue;
      }
      if (mask_iou(p.subject_mask, subj.mask) >= iou_thr &&
          mask_iou(p.object_mask, obj.mask) >= iou_thr) {
        taken[g] = 1;
        out.push_back({static_cast<std::int64_t>(rank), static_cast<std::int64_t>(g)});
        break;
      }
    }
  }
  return out;
}

std::optional<double> recall_at_k(std::span<const MatchPair> matches, std::int64_t gt_count,
                                  std::int64_t k) {
  if (gt_count <= 0) return std::nullopt;
  std::int64_t hits = 0;
  for (const auto& m : matches) {
    if (m.rank < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(gt_count);
}

std::optional<double> mean_recall_at_k(std::span<const std::vector<std::int64_t>> match_ranks,
                                       std::span<const std::int64_t> gt_per_relation,
                                       std::int64_t k) {
  double sum = 0.0;
  std::int64_t present = 0;
  for (std::size_t r = 0; r < gt_per_relation.size(); ++r) {
    if (gt_per_relation[r] <= 0) continue;
    std::int64_t hits = 0;
    if (r < match_ranks.size()) {
      for (auto rank : match_ranks[r]) {
        if (rank < k) ++hits;
      }
    }
    sum += static_cast<double>(hits) / static_cast<double>(gt_per_relation[r]);
    ++present;
  }
  if (present == 0) return std::nullopt;
  return sum / static_cast<double>(present);
}

EvalReport evaluate(const Dataset& gt, std::span<const ScenePredictions> preds,
                    const EvalConfig& config, int threads) {
  config.validate();
  std::map<std::string, const ScenePredictions*> by_id;
  for (const auto& p : preds) {
    if (gt.find_scene(p.scene_id) < 0) {
      throw Error("eval: predictions reference unknown scene '" + p.scene_id + "'");
    }
    if (!by_id.emplace(p.scene_id, &p).second) {
      throw Error("eval: duplicate predictions for scene '" + p.scene_id + "'");
    }
  }

  const auto num_scenes = gt.scenes.size();
  std::vector<std::vector<MatchPair>> matches(num_scenes);
  parallel_for(num_scenes, threads, [&](std::size_t i) {
    const auto& scene = gt.scenes[i];
    const auto it = by_id.find(scene.scene_id);
    if (it == by_id.end()) return;
    if (it->second->height != scene.height || it->second->width != scene.width) {
      throw Error("eval: scene '" + scene.scene_id + "' predictions have different dimensions");
    }
    matches[i] = match_scene(it->second->triplets, scene, config.iou_thr);
  });

  const auto num_relations = static_cast<std::size_t>(gt.num_relation_classes());
  EvalReport report;
  report.ks = config.ks;
  report.gt_per_relation.assign(num_relations, 0);
  std::vector<std::vector<std::int64_t>> ranks_per_relation(num_relations);
  for (std::size_t i = 0; i < num_scenes; ++i) {
    const auto& scene = gt.scenes[i];
    for (const auto& t : scene.triplets) ++report.gt_per_relation[static_cast<std::size_t>(t.relation_id)];
    for (const auto& m : matches[i]) {
      const auto r = scene.triplets[static_cast<std::size_t>(m.gt_index)].relation_id;
      ranks_per_relation[static_cast<std::size_t>(r)].push_back(m.rank);
    }
    if (!scene.triplets.empty()) ++report.scenes_evaluated;
    report.gt_total += static_cast<std::int64_t>(scene.triplets.size());
  }

  for (const auto k : config.ks) {
    double recall_sum = 0.0;
    std::int64_t matched = 0;
    for (std::size_t i = 0; i < num_scenes; ++i) {
      const auto r = recall_at_k(matches[i], static_cast<std::int64_t>(gt.scenes[i].triplets.size()), k);
      if (r) recall_sum += *r;
      for (const auto& m : matches[i]) {
        if (m.rank < k) ++matched;
      }
    }
    report.recall.push_back(report.scenes_evaluated > 0
                                ? recall_sum / static_cast<double>(report.scenes_evaluated)
                                : 0.0);
    report.mean_recall.push_back(
        mean_recall_at_k(ranks_per_relation, report.gt_per_relation, k).value_or(0.0));
    report.matched.push_back(matched);

    std::vector<std::optional<double>> per_rel(num_relations);
    for (std::size_t r = 0; r < num_relations; ++r) {
      if (report.gt_per_relation[r] == 0) continue;
      std::int64_t hits = 0;
      for (auto rank : ranks_per_relation[r]) {
        if (rank < k) ++hits;
      }
      per_rel[r] = static_cast<double>(hits) / static_cast<double>(report.gt_per_relation[r]);
    }
    report.per_relation_recall.push_back(std::move(per_rel));
  }
  return report;
}

namespace {

json k_json(std::int64_t k) {
  if (k == kAllPredictions) return "all";
  return k;
}

std::string k_label(std::int64_t k) { return k == kAllPredictions ? "all" : std::to_string(k); }

}  // namespace

json to_json(const EvalReport& report, std::span<const std::string> relation_names) {
  json ks = json::array();
  for (auto k : report.ks) ks.push_back(k_json(k));
  json per_rel = json::array();
  for (const auto& row : report.per_relation_recall) {
    json jr = json::array();
    for (const auto& v : row) jr.push_back(v ? json(*v) : json(nullptr));
    per_rel.push_back(std::move(jr));
  }
  return {{"ks", std::move(ks)},
          {"recall", report.recall},
          {"mean_recall", report.mean_recall},
          {"per_relation_recall", std::move(per_rel)},
          {"relation_names", std::vector<std::string>(relation_names.begin(), relation_names.end())},
          {"gt_per_relation", report.gt_per_relation},
          {"matched", report.matched},
          {"scenes_evaluated", report.scenes_evaluated},
          {"gt_total", report.gt_total}};
}

std::string format_table(const EvalReport& report, std::span<const std::string> relation_names) {
  std::ostringstream os;
  char buf[128];
  os << "K        R@K      mR@K     matched\n";
  for (std::size_t i = 0; i < report.ks.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%-8s %-8.4f %-8.4f %lld\n", k_label(report.ks[i]).c_str(),
                  report.recall[i], report.mean_recall[i],
                  static_cast<long long>(report.matched[i]));
    os << buf;
  }
  os << "\nrelation             gt";
  for (auto k : report.ks) {
    std::snprintf(buf, sizeof(buf), "   R@%-6s", k_label(k).c_str());
    os << buf;
  }
  os << "\n";
  for (std::size_t r = 0; r < report.gt_per_relation.size(); ++r) {
    const std::string name = r < relation_names.size() ? relation_names[r] : std::to_string(r);
    std::snprintf(buf, sizeof(buf), "%-18s %4lld", name.c_str(),
                  static_cast<long long>(report.gt_per_relation[r]));
    os << buf;
    for (const auto& row : report.per_relation_recall) {
      if (row[r]) {
        std::snprintf(buf, sizeof(buf), "   %-8.4f", *row[r]);
      } else {
        std::snprintf(buf, sizeof(buf), "   %-8s", "-");
      }
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

std::vector<std::int64_t> parse_ks(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "inf" || item == "all") {
      out.push_back(kAllPredictions);
      continue;
    }
    try {
      std::size_t used = 0;
      const auto k = std::stoll(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(k);
    } catch (const std::exception&) {
      throw Error("cannot parse K value '" + item + "'");
    }
  }
  return out;
}

}  // namespace hilo
