// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "hilo/error.hpp"
#include "hilo/relgen.hpp"
#include "hilo/toytrain.hpp"
#include "oracles.hpp"

namespace hilo {
namespace {

SynthConfig small_synth() {
  SynthConfig c;
  c.num_scenes = 4;
  c.grid_size = 6;
  c.num_object_classes = 3;
  c.num_relation_classes = 4;
  return c;
}

TrainConfig small_train() {
  TrainConfig t;
  t.steps = 6;
  t.learning_rate = 0.01;
  t.model.num_queries = 6;
  t.model.hidden_dim = 8;
  return t;
}

TEST(Synth, DeterministicAndValid) {
  const auto a = generate_synthetic(SynthConfig{});
  EXPECT_EQ(a, generate_synthetic(SynthConfig{}));
  EXPECT_NO_THROW(validate(a));
  EXPECT_EQ(a.scenes.size(), 24u);
  SynthConfig other;
  other.seed = 1;
  EXPECT_NE(a, generate_synthetic(other));
  for (const auto& s : a.scenes) {
    std::set<std::pair<std::int64_t, std::int64_t>> pairs;
    for (const auto& t : s.triplets) pairs.insert({t.subject_idx, t.object_idx});
    EXPECT_LE(pairs.size(), 2u);
    for (const auto& t : s.triplets) {
      EXPECT_LT(s.objects[static_cast<std::size_t>(t.subject_idx)].class_id,
                s.objects[static_cast<std::size_t>(t.object_idx)].class_id);
    }
  }
}

TEST(Synth, ConfigValidation) {
  SynthConfig c;
  c.objects_per_scene = 1;
  EXPECT_THROW(generate_synthetic(c), Error);
  c = {};
  c.multi_relation_fraction = 1.5;
  EXPECT_THROW(generate_synthetic(c), Error);
  c = {};
  c.grid_size = 0;
  EXPECT_THROW(generate_synthetic(c), Error);
  c = {};
  c.num_scenes = 0;
  EXPECT_TRUE(generate_synthetic(c).scenes.empty());
}

TEST(Synth, ZipfRankOrderOnLargeSet) {
  SynthConfig c;
  c.num_scenes = 3000;
  c.multi_relation_fraction = 0.0;
  const auto d = generate_synthetic(c);
  const auto freq = compute_frequency_table(d);
  double wsum = 0.0;
  for (int k = 0; k < 6; ++k) wsum += 1.0 / (k + 1.0);
  std::int64_t total = 0;
  for (auto n : freq.counts) total += n;
  ASSERT_GT(total, 3000);
  for (int k = 0; k < 6; ++k) {
    const double p = (1.0 / (k + 1.0)) / wsum;
    const double mean = static_cast<double>(total) * p;
    const double sd = std::sqrt(static_cast<double>(total) * p * (1.0 - p));
    EXPECT_NEAR(static_cast<double>(freq.counts[static_cast<std::size_t>(k)]), mean, 5.0 * sd)
        << "relation " << k;
    if (k > 0) EXPECT_GT(freq.counts[static_cast<std::size_t>(k - 1)], freq.counts[static_cast<std::size_t>(k)]);
  }
}

TEST(Synth, SingleRelationPairsMakeSwapTheIdentity) {
  SynthConfig c;
  c.multi_relation_fraction = 0.0;
  const auto d = generate_synthetic(c);
  EXPECT_EQ(multi_relation_pair_fraction(d), 0.0);
  const auto freq = compute_frequency_table(d);
  for (auto t : {SwapTarget::HL, SwapTarget::LH}) {
    EXPECT_EQ(swap_relations(d, freq, {t, SwapStrategy::Extreme}).data, d);
  }
}

TEST(Synth, PairScoresCoverEveryOrderedPairAndAugment) {
  const auto d = generate_synthetic(SynthConfig{});
  const auto scores = synthesize_pair_scores(d, 3);
  std::size_t pairs = 0;
  for (const auto& s : d.scenes) pairs += s.objects.size() * (s.objects.size() - 1);
  ASSERT_EQ(scores.size(), pairs);
  for (const auto& p : scores) {
    ASSERT_EQ(p.scores.size(), 7u);
    for (double v : p.scores) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
  }
  EXPECT_EQ(scores, synthesize_pair_scores(d, 3));
  const auto aug = augment_relations(d, scores);
  EXPECT_GT(multi_relation_pair_fraction(aug), multi_relation_pair_fraction(d));
}

TEST(Model, ShapesAndIdenticalBranches) {
  const auto d = generate_synthetic(small_synth());
  const auto m = ToyModel::initialize(3, 4, 6, {5, 7, 0.1}, 0);
  const auto hl = m.forward(Branch::HL, d.scenes[0]);
  const auto lh = m.forward(Branch::LH, d.scenes[0]);
  ASSERT_EQ(hl.size(), 5u);
  EXPECT_EQ(hl[0].subject_logits.size(), 4u);
  EXPECT_EQ(hl[0].relation_logits.size(), 5u);
  EXPECT_EQ(hl[0].subject_mask_logits.size(), 36u);
  EXPECT_EQ(hl, lh);
  auto wrong = d.scenes[0];
  wrong.height = 5;
  EXPECT_THROW(m.encode(wrong), Error);
  EXPECT_THROW(ToyModel::initialize(3, 4, 6, {0, 7, 0.1}, 0), Error);
}

TEST(Model, ParametersAndJsonRoundTrip) {
  auto m = ToyModel::initialize(3, 4, 6, {5, 7, 0.1}, 2);
  auto p = m.parameters();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] += 0.001 * static_cast<double>(i % 7);
  m.set_parameters(p);
  EXPECT_EQ(m.parameters(), p);
  EXPECT_THROW(m.set_parameters(std::vector<double>(3)), Error);
  const auto back = ToyModel::from_json(m.to_json());
  EXPECT_EQ(back.parameters(), p);
  EXPECT_EQ(back.to_json(), m.to_json());
  const auto path = oracle::temp_path("model.json");
  save_model(m, path);
  EXPECT_EQ(load_model(path).parameters(), p);
  auto j = m.to_json();
  j["format"] = "other";
  EXPECT_THROW(ToyModel::from_json(j), ParseError);
  j = m.to_json();
  j["projection"].erase(0);
  EXPECT_THROW(ToyModel::from_json(j), ParseError);
}

TEST(Training, DeterministicWithFullTrace) {
  const auto d = generate_synthetic(small_synth());
  const auto a = train(d, small_train());
  const auto b = train(d, small_train());
  ASSERT_EQ(a.trace.size(), 7u);
  EXPECT_EQ(trace_csv(a.trace), trace_csv(b.trace));
  EXPECT_EQ(a.model.parameters(), b.model.parameters());
  EXPECT_EQ(trace_csv(a.trace).substr(0, 64),
            std::string("step,total,baseline_hl,baseline_lh,object_consistency,relation_c"));
  for (const auto& r : a.trace) {
    EXPECT_NEAR(r.total,
                r.baseline_hl + r.baseline_lh + r.object_consistency + r.relation_consistency,
                1e-9 * r.total);
  }
  EXPECT_LT(a.trace.back().total, a.trace.front().total);
}

TEST(Training, ZeroLearningRateKeepsLossConstant) {
  const auto d = generate_synthetic(small_synth());
  auto cfg = small_train();
  cfg.learning_rate = 0.0;
  const auto r = train(d, cfg);
  for (const auto& row : r.trace) EXPECT_EQ(row.total, r.trace.front().total);
}

TEST(Training, RejectsBadConfigs) {
  const auto d = generate_synthetic(small_synth());
  auto cfg = small_train();
  cfg.learning_rate = std::nan("");
  EXPECT_THROW(train(d, cfg), Error);
  cfg = small_train();
  cfg.margin = -1.0;
  EXPECT_THROW(train(d, cfg), Error);
  cfg = small_train();
  cfg.model.num_queries = 1;
  EXPECT_THROW(train(d, cfg), Error);
  EXPECT_THROW(train(Dataset{}, small_train()), Error);
}

TEST(Training, RieOnlyChangesRelationTerm) {
  auto sc = small_synth();
  sc.multi_relation_fraction = 1.0;  // every pair is swapped
  const auto d = generate_synthetic(sc);
  const TrainingProblem problem(d, small_train());
  const auto m = ToyModel::initialize(3, 4, 6, small_train().model, 0);
  auto p = m.parameters();
  // Pull the branches apart so the consistency terms are nonzero.
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 0.5);
  for (auto& v : p) v += n(rng);
  auto moved = m;
  moved.set_parameters(p);
  const auto with = problem.evaluate(moved, {0.0, true}, false).terms;
  const auto without = problem.evaluate(moved, {0.0, false}, false).terms;
  EXPECT_EQ(with.baseline_hl, without.baseline_hl);
  EXPECT_EQ(with.baseline_lh, without.baseline_lh);
  EXPECT_EQ(with.object_consistency, without.object_consistency);
  EXPECT_NE(with.relation_consistency, without.relation_consistency);
}

TEST(Training, ObjectiveGradientWithFixedMatching) {
  auto sc = small_synth();
  sc.num_scenes = 2;
  sc.grid_size = 4;
  sc.pairs_per_scene = 1;
  auto tc = small_train();
  tc.model = {4, 4, 0.3};
  tc.margin = 0.0;
  const auto d = generate_synthetic(sc);
  const TrainingProblem problem(d, tc);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 0.3);
  for (int trial = 0; trial < 3; ++trial) {
    auto m = ToyModel::initialize(3, 4, 4, tc.model, static_cast<std::uint64_t>(trial));
    auto p = m.parameters();
    for (auto& v : p) v += n(rng);
    m.set_parameters(p);
    const auto fixed = problem.match(m);
    const auto base = problem.evaluate(m, problem.consistency(), true, fixed);
    const double h = 1e-5;
    for (std::size_t i = 0; i < p.size(); ++i) {
      auto probe = p;
      probe[i] = p[i] + h;
      m.set_parameters(probe);
      const double fp = problem.evaluate(m, problem.consistency(), false, fixed).terms.total;
      probe[i] = p[i] - h;
      m.set_parameters(probe);
      const double fm = problem.evaluate(m, problem.consistency(), false, fixed).terms.total;
      const double numeric = (fp - fm) / (2.0 * h);
      // Absolute slack covers rounding of f ~ 50 over a 2e-5 step.
      ASSERT_NEAR(base.gradient[i], numeric, 1e-6 + 1e-5 * std::abs(numeric)) << "param " << i;
    }
    m.set_parameters(p);
  }
}

TEST(Inference, PostprocessHandCase) {
  const PredictedTriplet keep{{5.0, 0.0, 0.0}, {0.0, 5.0, 0.0}, {0.0, 4.0, 0.0},
                              {1.0, -1.0, 0.0, -0.5}, {-3.0, -3.0, 2.0, 2.0}};
  auto padded = keep;
  padded.relation_logits = {0.0, 0.0, 9.0};
  const auto out = postprocess(std::vector{padded, keep}, 2, 2);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].subject_class, 0);
  EXPECT_EQ(out[0].object_class, 1);
  EXPECT_EQ(out[0].relation_class, 1);
  EXPECT_NEAR(out[0].subject_score, std::exp(5.0) / (std::exp(5.0) + 2.0), 1e-15);
  EXPECT_EQ(out[0].subject_mask.to_bits(), (std::vector<std::uint8_t>{1, 0, 1, 0}));
  EXPECT_EQ(out[0].object_mask.to_bits(), (std::vector<std::uint8_t>{0, 0, 1, 1}));
  EXPECT_THROW(postprocess(std::vector{keep}, 3, 3), Error);
}

TEST(Inference, SnapToGroundTruthMasks) {
  SceneGraph s;
  s.scene_id = "s";
  s.height = 4;
  s.width = 4;
  s.objects = {{BinaryMask::rectangle(4, 4, 0, 0, 2, 2), 0},
               {BinaryMask::rectangle(4, 4, 2, 2, 2, 2), 1}};
  std::vector<ScoredTriplet> preds(1);
  preds[0].subject_mask = BinaryMask::rectangle(4, 4, 1, 1, 3, 3);  // overlaps object 1 more
  preds[0].object_mask = BinaryMask::rectangle(4, 4, 0, 3, 1, 1);   // overlaps nothing
  snap_to_gt_masks(preds, s);
  EXPECT_EQ(preds[0].subject_mask, s.objects[1].mask);
  EXPECT_EQ(oracle::popcount(preds[0].object_mask.to_bits()), 0);
}

TEST(Inference, PredictDatasetModes) {
  const auto d = generate_synthetic(small_synth());
  const auto r = train(d, small_train());
  const auto fused = predict_dataset(r.model, d, InferenceMode::Fused, 1);
  EXPECT_EQ(fused, predict_dataset(r.model, d, InferenceMode::Fused, 3));
  ASSERT_EQ(fused.size(), d.scenes.size());
  for (std::size_t i = 0; i < d.scenes.size(); ++i) {
    const auto b = predict(r.model, d.scenes[i]);
    EXPECT_EQ(fused[i].triplets, fuse(b.hl, b.lh));
  }
  const auto hl = predict_dataset(r.model, d, InferenceMode::HLOnly);
  EXPECT_EQ(hl[0].triplets, rank_single(predict(r.model, d.scenes[0]).hl));
  const double mass = low_frequency_mass(r.model, Branch::HL, d, compute_frequency_table(d));
  EXPECT_GT(mass, 0.0);
  EXPECT_LT(mass, 1.0);
}

TEST(Config, JsonRoundTripAndUnknownKeys) {
  auto t = small_train();
  t.swap_mode = SwapMode::Extreme;
  t.weights.focal.gamma = 1.5;
  const auto back = train_config_from_json(to_json(t));
  EXPECT_EQ(to_json(back), to_json(t));
  EXPECT_EQ(to_json(synth_config_from_json(to_json(small_synth()))), to_json(small_synth()));
  EXPECT_THROW(train_config_from_json({{"stepz", 3}}), ParseError);
  EXPECT_THROW(train_config_from_json({{"steps", "many"}}), ParseError);
  EXPECT_THROW(synth_config_from_json(nlohmann::json::array()), ParseError);
  const auto e = eval_config_from_json({{"ks", {10, "all"}}, {"iou_thr", 0.4}});
  EXPECT_EQ(e.ks, (std::vector<std::int64_t>{10, kAllPredictions}));
  EXPECT_EQ(e.iou_thr, 0.4);
  EXPECT_EQ(parse_swap_mode("none"), SwapMode::None);
  EXPECT_THROW(parse_swap_mode("both"), Error);
}

}  // namespace
}  // namespace hilo
