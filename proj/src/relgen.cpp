// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#include "hilo/relgen.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <tuple>
#include <utility>

#include "hilo/error.hpp"

namespace hilo {

using nlohmann::json;

Dataset augment_relations(const Dataset& dataset, const std::vector<PairScores>& scores) {
  const auto num_relations = dataset.num_relation_classes();
  Dataset out = dataset;
  std::set<std::tuple<std::string, std::int64_t, std::int64_t>> seen;

  for (const auto& ps : scores) {
    const auto si = out.find_scene(ps.scene_id);
    if (si < 0) throw Error("pair scores reference unknown scene '" + ps.scene_id + "'");
    auto& scene = out.scenes[static_cast<std::size_t>(si)];
    const auto n = static_cast<std::int64_t>(scene.objects.size());
    const auto ctx = "scene '" + ps.scene_id + "' pair (" + std::to_string(ps.subject_idx) +
                     ", " + std::to_string(ps.object_idx) + ")";
    if (ps.subject_idx < 0 || ps.subject_idx >= n || ps.object_idx < 0 || ps.object_idx >= n ||
        ps.subject_idx == ps.object_idx) {
      throw Error(ctx + ": invalid object indices");
    }
    if (static_cast<std::int64_t>(ps.scores.size()) != num_relations + 1) {
      throw Error(ctx + ": expected " + std::to_string(num_relations + 1) + " scores, got " +
                  std::to_string(ps.scores.size()));
    }
    for (double v : ps.scores) {
      if (!(v >= 0.0 && v <= 1.0)) throw Error(ctx + ": scores must lie in [0, 1]");
    }
    if (!seen.emplace(ps.scene_id, ps.subject_idx, ps.object_idx).second) {
      throw Error(ctx + ": scored more than once");
    }

    // Only labels from the input dataset count toward the threshold.
    const auto& original = dataset.scenes[static_cast<std::size_t>(si)].triplets;
    std::set<std::int64_t> labeled;
    for (const auto& t : original) {
      if (t.subject_idx == ps.subject_idx && t.object_idx == ps.object_idx) {
        labeled.insert(t.relation_id);
      }
    }
    double threshold = ps.scores[static_cast<std::size_t>(num_relations)];
    if (!labeled.empty()) {
      threshold = ps.scores[static_cast<std::size_t>(*labeled.begin())];
      for (auto r : labeled) threshold = std::max(threshold, ps.scores[static_cast<std::size_t>(r)]);
    }
    for (std::int64_t k = 0; k < num_relations; ++k) {
      if (labeled.contains(k)) continue;
      if (ps.scores[static_cast<std::size_t>(k)] > threshold) {
        scene.triplets.push_back({ps.subject_idx, ps.object_idx, k});
      }
    }
  }
  return out;
}

SwappedDataset swap_relations(const Dataset& dataset, const RelationFrequencyTable& freq,
                              SwapDirection direction) {
  if (freq.size() != dataset.num_relation_classes()) {
    throw Error("frequency table has " + std::to_string(freq.size()) + " entries, expected " +
                std::to_string(dataset.num_relation_classes()));
  }
  const auto& f = freq.counts;
  SwappedDataset out{dataset, {}};
  out.origins.reserve(dataset.scenes.size());

  for (auto& scene : out.data.scenes) {
    auto& triplets = scene.triplets;
    std::vector<SwapOrigin> origins(triplets.size());
    std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < triplets.size(); ++i) {
      groups[{triplets[i].subject_idx, triplets[i].object_idx}].push_back(i);
    }
    for (auto& [pair, members] : groups) {
      // Descending frequency, ties by relation id then by triplet position.
      std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
        const auto ra = triplets[a].relation_id, rb = triplets[b].relation_id;
        if (f[ra] != f[rb]) return f[ra] > f[rb];
        return ra < rb;
      });
      const auto k_count = members.size();
      std::vector<std::int64_t> labels(k_count);
      for (std::size_t k = 0; k < k_count; ++k) labels[k] = triplets[members[k]].relation_id;

      std::vector<std::int64_t> swapped = labels;
      if (k_count > 1) {
        switch (direction.strategy) {
          case SwapStrategy::Adjacent:
            if (direction.target == SwapTarget::HL) {
              for (std::size_t k = 0; k + 1 < k_count; ++k) swapped[k] = labels[k + 1];
            } else {
              for (std::size_t k = 1; k < k_count; ++k) swapped[k] = labels[k - 1];
            }
            break;
          case SwapStrategy::Extreme: {
            const auto fill = direction.target == SwapTarget::HL ? labels.back() : labels.front();
            std::fill(swapped.begin(), swapped.end(), fill);
            break;
          }
        }
      }
      for (std::size_t k = 0; k < k_count; ++k) {
        const auto idx = members[k];
        origins[idx] = {labels[k], static_cast<std::int64_t>(k),
                        static_cast<std::int64_t>(k_count)};
        triplets[idx].relation_id = swapped[k];
      }
    }
    out.origins.push_back(std::move(origins));
  }
  return out;
}

std::vector<PairScores> pair_scores_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("pair scores: expected a JSON array");
  std::vector<PairScores> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    try {
      out.push_back({e.at("scene_id").get<std::string>(), e.at("subject_idx").get<std::int64_t>(),
                     e.at("object_idx").get<std::int64_t>(),
                     e.at("scores").get<std::vector<double>>()});
    } catch (const json::exception& ex) {
      throw ParseError("pair scores[" + std::to_string(i) + "]: " + ex.what());
    }
  }
  return out;
}

json to_json(const std::vector<PairScores>& scores) {
  json out = json::array();
  for (const auto& ps : scores) {
    out.push_back({{"scene_id", ps.scene_id},
                   {"subject_idx", ps.subject_idx},
                   {"object_idx", ps.object_idx},
                   {"scores", ps.scores}});
  }
  return out;
}

std::vector<PairScores> load_pair_scores(const std::filesystem::path& path) {
  return pair_scores_from_json(read_json_file(path));
}

SwapTarget parse_swap_target(const std::string& s) {
  if (s == "hl") return SwapTarget::HL;
  if (s == "lh") return SwapTarget::LH;
  throw Error("unknown swap direction '" + s + "' (expected hl or lh)");
}

SwapStrategy parse_swap_strategy(const std::string& s) {
  if (s == "adjacent") return SwapStrategy::Adjacent;
  if (s == "extreme") return SwapStrategy::Extreme;
  throw Error("unknown swap mode '" + s + "' (expected adjacent or extreme)");
}

}  // namespace hilo
