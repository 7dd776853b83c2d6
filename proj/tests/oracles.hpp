// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Brute-force reference implementations used by the unit and acceptance tests.
// They work on plain bit grids and permutations and share no code with the
// library beyond the data types.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "hilo/fusion.hpp"
#include "hilo/mask.hpp"
#include "hilo/scene.hpp"

namespace hilo::oracle {

using Bits = std::vector<std::uint8_t>;
using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Masks

inline Bits decode(std::int64_t h, std::int64_t w, const std::vector<std::int64_t>& runs) {
  Bits out;
  std::uint8_t v = 0;
  for (auto r : runs) {
    out.insert(out.end(), static_cast<std::size_t>(r), v);
    v ^= 1;
  }
  out.resize(static_cast<std::size_t>(h * w), 0);
  return out;
}

inline std::vector<std::int64_t> encode(const Bits& bits) {
  std::vector<std::int64_t> runs;
  std::uint8_t cur = 0;
  std::int64_t len = 0;
  for (auto b : bits) {
    const std::uint8_t v = b ? 1 : 0;
    if (v == cur) {
      ++len;
    } else {
      runs.push_back(len);
      cur = v;
      len = 1;
    }
  }
  runs.push_back(len);
  return runs;
}

inline std::int64_t popcount(const Bits& a) {
  return std::count_if(a.begin(), a.end(), [](auto v) { return v != 0; });
}

inline std::int64_t and_count(const Bits& a, const Bits& b) {
  std::int64_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] && b[i]) ? 1 : 0;
  return n;
}

inline Bits or_bits(const Bits& a, const Bits& b) {
  Bits out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] || b[i]) ? 1 : 0;
  return out;
}

inline double iou(const Bits& a, const Bits& b) {
  const auto inter = and_count(a, b);
  const auto uni = popcount(or_bits(a, b));
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline Bits random_bits(std::size_t n, double p, Rng& rng) {
  std::bernoulli_distribution d(p);
  Bits out(n);
  for (auto& v : out) v = d(rng) ? 1 : 0;
  return out;
}

inline BinaryMask random_mask(std::int64_t h, std::int64_t w, Rng& rng) {
  const double p = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return BinaryMask::from_bits(h, w, random_bits(static_cast<std::size_t>(h * w), p, rng));
}

// ---------------------------------------------------------------------------
// Assignment: enumerate every injective gt -> query map.

struct BruteAssignment {
  double cost = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;  // (query, gt), sorted by query
};

inline BruteAssignment brute_force_assignment(std::int64_t rows, std::int64_t cols,
                                              const std::vector<double>& cost) {
  BruteAssignment best;
  std::vector<std::int64_t> perm(static_cast<std::size_t>(rows));
  std::iota(perm.begin(), perm.end(), 0);
  // Every permutation of the rows; the first `cols` entries give gt -> query.
  // Duplicated prefixes are harmless.
  do {
    double c = 0.0;
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    for (std::int64_t g = 0; g < cols; ++g) {
      const auto q = perm[static_cast<std::size_t>(g)];
      c += cost[static_cast<std::size_t>(q * cols + g)];
      pairs.emplace_back(q, g);
    }
    std::sort(pairs.begin(), pairs.end());
    if (c < best.cost || (c == best.cost && pairs < best.pairs)) {
      best.cost = c;
      best.pairs = pairs;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (cols == 0) best.cost = 0.0;
  return best;
}

// ---------------------------------------------------------------------------
// Evaluation: greedy rank-order matching on bit grids.

struct OracleTriplet {
  std::int64_t s, o, r;
  Bits sm, om;
};

struct OracleScene {
  std::vector<OracleTriplet> gt;
  std::vector<OracleTriplet> preds;  // ranked
};

struct OracleResult {
  std::vector<double> recall;  // per k
  std::vector<double> mean_recall;
};

inline OracleResult brute_force_evaluate(const std::vector<OracleScene>& scenes,
                                         std::int64_t num_relations,
                                         const std::vector<std::int64_t>& ks, double thr) {
  OracleResult res;
  for (auto k : ks) {
    double recall_sum = 0.0;
    int recall_n = 0;
    std::vector<std::int64_t> hit(static_cast<std::size_t>(num_relations), 0);
    std::vector<std::int64_t> tot(static_cast<std::size_t>(num_relations), 0);
    for (const auto& sc : scenes) {
      std::vector<bool> used(sc.gt.size(), false);
      std::int64_t matched = 0;
      for (std::size_t rank = 0; rank < sc.preds.size(); ++rank) {
        if (static_cast<std::int64_t>(rank) >= k) break;
        const auto& p = sc.preds[rank];
        for (std::size_t g = 0; g < sc.gt.size(); ++g) {
          const auto& t = sc.gt[g];
          if (used[g] || t.s != p.s || t.o != p.o || t.r != p.r) continue;
          if (iou(t.sm, p.sm) >= thr && iou(t.om, p.om) >= thr) {
            used[g] = true;
            ++matched;
            ++hit[static_cast<std::size_t>(t.r)];
            break;
          }
        }
      }
      for (const auto& t : sc.gt) ++tot[static_cast<std::size_t>(t.r)];
      if (!sc.gt.empty()) {
        recall_sum += static_cast<double>(matched) / static_cast<double>(sc.gt.size());
        ++recall_n;
      }
    }
    res.recall.push_back(recall_n ? recall_sum / recall_n : 0.0);
    double mr = 0.0;
    int classes = 0;
    for (std::int64_t r = 0; r < num_relations; ++r) {
      if (tot[static_cast<std::size_t>(r)] == 0) continue;
      mr += static_cast<double>(hit[static_cast<std::size_t>(r)]) /
            static_cast<double>(tot[static_cast<std::size_t>(r)]);
      ++classes;
    }
    res.mean_recall.push_back(classes ? mr / classes : 0.0);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Random data

inline Dataset random_dataset(Rng& rng, std::int64_t scenes, std::int64_t classes,
                              std::int64_t relations, std::int64_t h, std::int64_t w) {
  Dataset d;
  for (std::int64_t c = 0; c < classes; ++c) d.object_class_names.push_back("c" + std::to_string(c));
  for (std::int64_t r = 0; r < relations; ++r) d.relation_class_names.push_back("r" + std::to_string(r));
  std::uniform_int_distribution<std::int64_t> cls(0, classes - 1), rel(0, relations - 1);
  for (std::int64_t i = 0; i < scenes; ++i) {
    SceneGraph s;
    s.scene_id = "s" + std::to_string(i);
    s.height = h;
    s.width = w;
    const auto n = std::uniform_int_distribution<std::int64_t>(2, 4)(rng);
    for (std::int64_t k = 0; k < n; ++k) s.objects.push_back({random_mask(h, w, rng), cls(rng)});
    const auto m = std::uniform_int_distribution<std::int64_t>(0, 5)(rng);
    std::uniform_int_distribution<std::int64_t> obj(0, n - 1);
    for (std::int64_t t = 0; t < m; ++t) {
      const auto a = obj(rng);
      auto b = obj(rng);
      if (a == b) b = (b + 1) % n;
      s.triplets.push_back({a, b, rel(rng)});
    }
    d.scenes.push_back(std::move(s));
  }
  return d;
}

inline std::filesystem::path temp_path(const std::string& name) {
  // Per process: ctest runs test cases of one binary concurrently.
  const auto dir = std::filesystem::temp_directory_path() / "hilo_sg_tests" /
                   std::to_string(::getpid());
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace hilo::oracle
