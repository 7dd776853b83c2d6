// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <tuple>

#include "hilo/error.hpp"
#include "hilo/toytrain.hpp"

namespace hilo {
namespace {

const std::vector<std::string> kObjectNames = {"person", "table", "cup",  "dog",   "car",
                                               "tree",   "chair", "bike", "horse", "grass"};
const std::vector<std::string> kRelationNames = {"on",      "beside",   "over",   "holding",
                                                 "looking", "standing", "riding", "leaning",
                                                 "sitting", "parked"};

std::vector<std::string> make_names(const std::vector<std::string>& base, std::int64_t n,
                                    const char* fallback) {
  std::vector<std::string> out;
  for (std::int64_t i = 0; i < n; ++i) {
    out.push_back(i < static_cast<std::int64_t>(base.size()) ? base[static_cast<std::size_t>(i)]
                                                              : fallback + std::to_string(i));
  }
  return out;
}

std::vector<double> zipf_weights(std::int64_t n, double exponent) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k < n; ++k) w[static_cast<std::size_t>(k)] = 1.0 / std::pow(k + 1.0, exponent);
  return w;
}

// Weighted sampling without replacement.
std::vector<std::int64_t> sample_distinct(std::vector<double> weights, std::int64_t count,
                                          std::mt19937_64& rng) {
  std::vector<std::int64_t> out;
  for (std::int64_t i = 0; i < count; ++i) {
    std::discrete_distribution<std::int64_t> dist(weights.begin(), weights.end());
    const auto k = dist(rng);
    out.push_back(k);
    weights[static_cast<std::size_t>(k)] = 0.0;
  }
  return out;
}

BinaryMask place_rectangle(std::int64_t grid, std::vector<std::uint8_t>& occupied,
                           std::mt19937_64& rng) {
  const std::int64_t max_side = std::max<std::int64_t>(2, grid / 2);
  std::uniform_int_distribution<std::int64_t> side(2, max_side);
  for (int attempt = 0; attempt < 64; ++attempt) {
    const auto h = std::min(side(rng), grid);
    const auto w = std::min(side(rng), grid);
    std::uniform_int_distribution<std::int64_t> top(0, grid - h), left(0, grid - w);
    const auto r0 = top(rng), c0 = left(rng);
    bool free = true;
    for (auto r = r0; r < r0 + h && free; ++r) {
      for (auto c = c0; c < c0 + w; ++c) {
        if (occupied[static_cast<std::size_t>(r * grid + c)]) {
          free = false;
          break;
        }
      }
    }
    if (!free) continue;
    for (auto r = r0; r < r0 + h; ++r) {
      for (auto c = c0; c < c0 + w; ++c) occupied[static_cast<std::size_t>(r * grid + c)] = 1;
    }
    return BinaryMask::rectangle(grid, grid, r0, c0, h, w);
  }
  // Crowded grid: fall back to the first free pixel.
  for (std::int64_t i = 0; i < grid * grid; ++i) {
    if (!occupied[static_cast<std::size_t>(i)]) {
      occupied[static_cast<std::size_t>(i)] = 1;
      return BinaryMask::rectangle(grid, grid, i / grid, i % grid, 1, 1);
    }
  }
  return BinaryMask::empty(grid, grid);
}

}  // namespace

void SynthConfig::validate() const {
  if (num_scenes < 0 || grid_size <= 0 || num_object_classes <= 0 || num_relation_classes <= 0 ||
      objects_per_scene < 2 || pairs_per_scene < 0 || zipf_exponent < 0.0) {
    throw Error("synthetic config: sizes must be positive (objects_per_scene >= 2)");
  }
  if (!(multi_relation_fraction >= 0.0 && multi_relation_fraction <= 1.0)) {
    throw Error("synthetic config: multi_relation_fraction must lie in [0, 1]");
  }
}

Dataset generate_synthetic(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  Dataset d;
  d.object_class_names = make_names(kObjectNames, config.num_object_classes, "object");
  d.relation_class_names = make_names(kRelationNames, config.num_relation_classes, "relation");
  const auto weights = zipf_weights(config.num_relation_classes, config.zipf_exponent);
  const auto grid = config.grid_size;
  std::uniform_int_distribution<std::int64_t> cls(0, config.num_object_classes - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::int64_t i = 0; i < config.num_scenes; ++i) {
    SceneGraph s;
    s.scene_id = config.scene_prefix + "_" + std::to_string(i);
    s.height = grid;
    s.width = grid;
    std::vector<std::uint8_t> occupied(static_cast<std::size_t>(grid * grid), 0);
    for (std::int64_t k = 0; k < config.objects_per_scene; ++k) {
      const auto c = cls(rng);
      s.objects.push_back({place_rectangle(grid, occupied, rng), c});
    }
    // Labeled pairs follow the object classes (subject class < object class, in
    // class order) so that which pairs carry relations is learnable from the scene.
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    for (std::int64_t a = 0; a < config.objects_per_scene; ++a) {
      for (std::int64_t b = 0; b < config.objects_per_scene; ++b) {
        if (s.objects[static_cast<std::size_t>(a)].class_id < s.objects[static_cast<std::size_t>(b)].class_id) {
          pairs.emplace_back(a, b);
        }
      }
    }
    std::sort(pairs.begin(), pairs.end(), [&](const auto& x, const auto& y) {
      const auto key = [&](const auto& p) {
        return std::make_tuple(s.objects[static_cast<std::size_t>(p.first)].class_id,
                               s.objects[static_cast<std::size_t>(p.second)].class_id, p.first, p.second);
      };
      return key(x) < key(y);
    });
    if (static_cast<std::int64_t>(pairs.size()) > config.pairs_per_scene) {
      pairs.resize(static_cast<std::size_t>(config.pairs_per_scene));
    }
    for (const auto& [subj, obj] : pairs) {
      std::int64_t count = 1;
      if (unit(rng) < config.multi_relation_fraction) count = unit(rng) < 0.5 ? 2 : 3;
      count = std::min(count, config.num_relation_classes);
      for (auto r : sample_distinct(weights, count, rng)) s.triplets.push_back({subj, obj, r});
    }
    d.scenes.push_back(std::move(s));
  }
  validate(d);
  return d;
}

std::vector<PairScores> synthesize_pair_scores(const Dataset& dataset, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto num_relations = dataset.num_relation_classes();
  const auto weights = zipf_weights(num_relations, 1.0);
  std::vector<PairScores> out;
  for (const auto& s : dataset.scenes) {
    const auto n = static_cast<std::int64_t>(s.objects.size());
    for (std::int64_t a = 0; a < n; ++a) {
      for (std::int64_t b = 0; b < n; ++b) {
        if (a == b) continue;
        std::set<std::int64_t> labeled;
        for (const auto& t : s.triplets) {
          if (t.subject_idx == a && t.object_idx == b) labeled.insert(t.relation_id);
        }
        PairScores ps{s.scene_id, a, b, std::vector<double>(static_cast<std::size_t>(num_relations + 1))};
        for (std::int64_t k = 0; k < num_relations; ++k) {
          const auto idx = static_cast<std::size_t>(k);
          // A biased scorer: frequent relations score higher everywhere, but on
          // background pairs it is mostly sure there is no relation.
          const double scale = labeled.empty() ? 0.3 + 0.5 * weights[idx] / weights[0]
                                               : 0.4 + 0.6 * weights[idx] / weights[0];
          ps.scores[idx] = labeled.contains(k) ? 0.35 + 0.5 * unit(rng) : unit(rng) * scale;
        }
        ps.scores.back() = labeled.empty() ? 0.6 + 0.4 * unit(rng) : 0.3 * unit(rng);
        out.push_back(std::move(ps));
      }
    }
  }
  return out;
}

}  // namespace hilo
