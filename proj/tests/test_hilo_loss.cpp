// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>
#include <tuple>

#include <gtest/gtest.h>

#include "hilo/assignment.hpp"
#include "hilo/error.hpp"
#include "hilo/gradcheck.hpp"
#include "hilo/hilo_loss.hpp"
#include "oracles.hpp"

namespace hilo {
namespace {

using Vec = std::vector<double>;

Vec random_logits(oracle::Rng& rng, std::size_t n) {
  std::normal_distribution<double> d(0.0, 1.5);
  Vec v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

TEST(Rie, HandExample) {
  const SwapMap m{{{0, 2}}};
  EXPECT_EQ(rie(Vec{0.1, 0.3, 0.5, 0.1}, m), (Vec{0.5, 0.3, 0.1, 0.1}));
  EXPECT_EQ(rie(Vec{0.1, 0.3, 0.5, 0.1}, SwapMap{}), (Vec{0.1, 0.3, 0.5, 0.1}));
  EXPECT_EQ(m.image(2), 0);
  EXPECT_EQ(m.image(1), 1);
}

TEST(Rie, ValidatesMap) {
  EXPECT_THROW(rie(Vec{1, 2, 3}, SwapMap{{{0, 3}}}), Error);
  EXPECT_THROW(rie(Vec{1, 2, 3}, SwapMap{{{1, 1}}}), Error);
  EXPECT_THROW(rie(Vec{1, 2, 3, 4}, SwapMap{{{0, 1}, {1, 2}}}), Error);
  EXPECT_NO_THROW(rie(Vec{1, 2, 3, 4}, SwapMap{{{0, 1}, {2, 3}}}));
  EXPECT_TRUE(pair_swap_map(3, 3).empty());
  EXPECT_EQ(pair_swap_map(1, 4).transpositions.size(), 1u);
}

TEST(Distance, HandValues) {
  const Vec a{std::log(2.0), 0.0};  // softmax [2/3, 1/3]
  const Vec b{0.0, std::log(2.0)};  // softmax [1/3, 2/3]
  const auto [first, second] = hilo_distance_terms(a, b, SwapMap{});
  EXPECT_NEAR(first, 2.0 / 9.0, 1e-15);
  EXPECT_NEAR(second, 2.0 / 9.0, 1e-15);
  // Mirrored outputs under the swap are consistent.
  EXPECT_NEAR(hilo_distance(a, b, SwapMap{{{0, 1}}}).value, 0.0, 1e-15);
}

TEST(Distance, PropertiesOnRandomInputs) {
  oracle::Rng rng(11);
  for (int it = 0; it < 500; ++it) {
    const auto r = std::uniform_int_distribution<std::size_t>(2, 8)(rng);
    const auto hl = random_logits(rng, r);
    const auto lh = random_logits(rng, r);
    const auto i = std::uniform_int_distribution<std::int64_t>(0, static_cast<std::int64_t>(r) - 1)(rng);
    const auto j = (i + 1) % static_cast<std::int64_t>(r);
    const SwapMap m{{{i, j}}};
    const auto [first, second] = hilo_distance_terms(hl, lh, m);
    ASSERT_GE(first, 0.0);
    ASSERT_NEAR(first, second, 1e-12);
    ASSERT_NEAR(hilo_distance(hl, lh, m).value, hilo_distance(lh, hl, m).value, 1e-12);
    // Exact mirror: lh logits are hl logits with the pair exchanged.
    ASSERT_NEAR(hilo_distance(hl, rie(hl, m), m).value, 0.0, 1e-12);
    // Independent value: both halves by direct summation.
    const auto sh = softmax(hl), sl = softmax(lh);
    double ref = 0.0;
    for (std::size_t k = 0; k < r; ++k) {
      const double d1 = sh[k] - sl[static_cast<std::size_t>(m.image(static_cast<std::int64_t>(k)))];
      const double d2 = sh[static_cast<std::size_t>(m.image(static_cast<std::int64_t>(k)))] - sl[k];
      ref += d1 * d1 + d2 * d2;
    }
    ASSERT_NEAR(hilo_distance(hl, lh, m).value, ref, 1e-12);
  }
}

TEST(RelationConsistency, HingeAndMasking) {
  oracle::Rng rng(12);
  for (int it = 0; it < 300; ++it) {
    const auto hl = random_logits(rng, 5);
    const auto lh = random_logits(rng, 5);
    const SwapMap m{{{1, 3}}};
    const double margin = std::uniform_real_distribution<double>(0.0, 0.6)(rng);
    const double d = hilo_distance(hl, lh, m).value;
    const auto with = relation_consistency(hl, lh, m, margin, true);
    ASSERT_NEAR(with.value, std::max(d - margin, 0.0), 1e-14);
    if (d <= margin) {
      for (const auto& g : with.grads) {
        for (double x : g) ASSERT_EQ(x, 0.0);
      }
    }
    const auto sh = softmax(hl), sl = softmax(lh);
    double masked = 0.0;
    for (std::size_t k : {0u, 2u, 4u}) masked += 2.0 * (sh[k] - sl[k]) * (sh[k] - sl[k]);
    ASSERT_NEAR(relation_consistency(hl, lh, m, margin, false).value,
                std::max(masked - margin, 0.0), 1e-14);
  }
  EXPECT_THROW(relation_consistency(Vec{0, 0}, Vec{0, 0}, SwapMap{}, -0.1, true), Error);
  EXPECT_THROW(relation_consistency(Vec{0, 0}, Vec{0}, SwapMap{}, 0.1, false), Error);
}

TEST(RelationConsistency, MarginExamples) {
  // Distance 4/9 from the hand case.
  const Vec a{std::log(2.0), 0.0};
  const Vec b{0.0, std::log(2.0)};
  EXPECT_EQ(relation_consistency(a, b, SwapMap{}, 0.5, true).value, 0.0);
  EXPECT_NEAR(relation_consistency(a, b, SwapMap{}, 0.1, true).value, 4.0 / 9.0 - 0.1, 1e-15);
}

PredictedTriplet random_triplet(oracle::Rng& rng, std::size_t classes, std::size_t relations,
                                std::size_t pixels) {
  return {random_logits(rng, classes + 1), random_logits(rng, classes + 1),
          random_logits(rng, relations + 1), random_logits(rng, pixels),
          random_logits(rng, pixels)};
}

TEST(ObjectConsistency, IdenticalIsZeroAndValueMatches) {
  oracle::Rng rng(13);
  const auto a = random_triplet(rng, 3, 4, 9);
  const auto b = random_triplet(rng, 3, 4, 9);
  EXPECT_EQ(subject_object_consistency(a, a).value, 0.0);
  const auto sa = softmax(a.subject_logits), sb = softmax(b.subject_logits);
  const auto oa = softmax(a.object_logits), ob = softmax(b.object_logits);
  double ref = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    ref += (sa[i] - sb[i]) * (sa[i] - sb[i]) + (oa[i] - ob[i]) * (oa[i] - ob[i]);
  }
  for (std::size_t i = 0; i < 9; ++i) {
    const double d1 = sigmoid(a.subject_mask_logits[i]) - sigmoid(b.subject_mask_logits[i]);
    const double d2 = sigmoid(a.object_mask_logits[i]) - sigmoid(b.object_mask_logits[i]);
    ref += d1 * d1 + d2 * d2;
  }
  const auto r = subject_object_consistency(a, b);
  EXPECT_NEAR(r.value, ref, 1e-13);
  ASSERT_EQ(r.grads.size(), 2 * kTripletSlots);
  for (double x : r.grads[2]) EXPECT_EQ(x, 0.0);
  auto c = b;
  c.object_mask_logits.pop_back();
  EXPECT_THROW(subject_object_consistency(a, c), Error);
}

struct Fixture {
  SceneGraph scene;
  std::vector<PredictedTriplet> preds;
};

Fixture random_fixture(oracle::Rng& rng, std::size_t queries) {
  auto d = oracle::random_dataset(rng, 1, 3, 4, 3, 3);
  auto& s = d.scenes[0];
  if (s.triplets.empty()) s.triplets.push_back({0, 1, 2});
  // Duplicate ground truths tie in the matching and make query order matter.
  std::sort(s.triplets.begin(), s.triplets.end(), [](const auto& x, const auto& y) {
    return std::tie(x.subject_idx, x.object_idx, x.relation_id) <
           std::tie(y.subject_idx, y.object_idx, y.relation_id);
  });
  s.triplets.erase(std::unique(s.triplets.begin(), s.triplets.end()), s.triplets.end());
  while (s.triplets.size() > queries) s.triplets.pop_back();
  Fixture f{s, {}};
  for (std::size_t q = 0; q < queries; ++q) f.preds.push_back(random_triplet(rng, 3, 4, 9));
  return f;
}

TEST(Baseline, UnmatchedQueriesTargetPadding) {
  oracle::Rng rng(14);
  auto f = random_fixture(rng, 2);
  f.scene.triplets.clear();
  const auto r = baseline_loss(f.preds, f.scene, Assignment{{}, {0, 1}});
  double ref = 0.0;
  for (const auto& p : f.preds) {
    ref += cross_entropy(p.subject_logits, 3).value + cross_entropy(p.object_logits, 3).value +
           4.0 * cross_entropy(p.relation_logits, 4).value;
  }
  EXPECT_NEAR(r.value, ref, 1e-12);
  for (double x : r.grads[3]) EXPECT_EQ(x, 0.0);
  EXPECT_THROW(baseline_loss(f.preds, f.scene, Assignment{{{0, 0}}, {1}}), Error);
}

TEST(TotalLoss, IdenticalBranchesDoubleTheBaseline) {
  oracle::Rng rng(15);
  for (int it = 0; it < 20; ++it) {
    const auto f = random_fixture(rng, 4);
    const auto a = hungarian(build_cost_matrix(f.preds, f.scene));
    std::vector<std::int64_t> labels;
    for (const auto& t : f.scene.triplets) labels.push_back(t.relation_id);
    const auto corr = build_correspondence(a, a, labels, labels);
    const auto t = total_loss(f.preds, f.preds, f.scene, f.scene, a, a, corr, {0.0, true});
    const auto base = baseline_loss(f.preds, f.scene, a);
    ASSERT_NEAR(t.report.value, 2.0 * base.value, 1e-12);
    ASSERT_EQ(t.object_consistency, 0.0);
    ASSERT_EQ(t.relation_consistency, 0.0);
  }
}

TEST(TotalLoss, InvariantToQueryOrder) {
  oracle::Rng rng(16);
  for (int it = 0; it < 20; ++it) {
    const auto f = random_fixture(rng, 4);
    auto lh_preds = f.preds;
    for (auto& p : lh_preds) {
      for (auto& x : p.relation_logits) x += 0.3 * x * x;
    }
    auto lh_scene = f.scene;
    for (auto& t : lh_scene.triplets) t.relation_id = (t.relation_id + 1) % 4;
    const auto run = [&](const std::vector<PredictedTriplet>& hp,
                         const std::vector<PredictedTriplet>& lp) {
      const auto ahl = hungarian(build_cost_matrix(hp, f.scene));
      const auto alh = hungarian(build_cost_matrix(lp, lh_scene));
      std::vector<std::int64_t> hl_labels, lh_labels;
      for (const auto& t : f.scene.triplets) hl_labels.push_back(t.relation_id);
      for (const auto& t : lh_scene.triplets) lh_labels.push_back(t.relation_id);
      return total_loss(hp, lp, f.scene, lh_scene, ahl, alh,
                        build_correspondence(ahl, alh, hl_labels, lh_labels), {0.1, true})
          .report.value;
    };
    // Each branch may be permuted on its own; pairs are tied by ground truth.
    const std::vector<std::size_t> perm_hl{3, 1, 0, 2}, perm_lh{1, 2, 3, 0};
    std::vector<PredictedTriplet> hp, lp;
    for (std::size_t k = 0; k < 4; ++k) {
      hp.push_back(f.preds[perm_hl[k]]);
      lp.push_back(lh_preds[perm_lh[k]]);
    }
    ASSERT_NEAR(run(f.preds, lh_preds), run(hp, lp), 1e-12);
  }
}

TEST(TotalLoss, RejectsMismatchedScenes) {
  oracle::Rng rng(17);
  const auto f = random_fixture(rng, 2);
  auto other = f.scene;
  other.triplets.push_back({0, 1, 0});
  const Assignment a{{}, {0, 1}};
  EXPECT_THROW(total_loss(f.preds, f.preds, f.scene, other, a, a, {}), Error);
}

TEST(GradientSuite, SmallRunPasses) {
  for (const auto& r : run_gradient_suite(10, 0)) {
    EXPECT_TRUE(r.passed) << r.kernel << " max rel err " << r.max_rel_error;
  }
}

}  // namespace
}  // namespace hilo
