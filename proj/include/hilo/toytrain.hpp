// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "hilo/assignment.hpp"
#include "hilo/fusion.hpp"
#include "hilo/hilo_loss.hpp"
#include "hilo/metrics.hpp"
#include "hilo/prediction.hpp"
#include "hilo/relgen.hpp"
#include "hilo/scene.hpp"

namespace hilo {

// ---------------------------------------------------------------------------
// Synthetic data

struct SynthConfig {
  std::int64_t num_scenes = 24;
  std::int64_t grid_size = 8;
  std::int64_t num_object_classes = 5;
  std::int64_t num_relation_classes = 6;
  double zipf_exponent = 1.0;
  double multi_relation_fraction = 0.5;
  std::uint64_t seed = 0;
  std::int64_t objects_per_scene = 3;
  std::int64_t pairs_per_scene = 2;
  std::string scene_prefix = "scene";

  void validate() const;
};

/// Scenes of non-overlapping rectangular objects. Up to `pairs_per_scene`
/// ordered pairs whose subject class is below the object class are labeled,
/// with relations drawn from a Zipf law over relation ids (id 0 most frequent).
/// A `multi_relation_fraction` share of pairs carries 2-3 distinct relations.
Dataset generate_synthetic(const SynthConfig& config);

/// Stand-in for a biased relation scorer: labeled relations score high,
/// frequent relations score higher than rare ones, and unlabeled pairs get a
/// high no-relation score. Covers every ordered object pair of every scene.
std::vector<PairScores> synthesize_pair_scores(const Dataset& dataset, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Model

enum class Branch { HL = 0, LH = 1 };
enum class SwapMode { None, Adjacent, Extreme };

SwapMode parse_swap_mode(const std::string& s);
std::string to_string(SwapMode mode);

struct ModelConfig {
  std::int64_t num_queries = 20;
  std::int64_t hidden_dim = 32;
  double init_scale = 0.1;
};

/// Learnable parameters of one decoder branch.
struct BranchParams {
  Eigen::MatrixXd queries;  // Q x D
  Eigen::MatrixXd subject_w;
  Eigen::VectorXd subject_b;  // C + 1
  Eigen::MatrixXd object_w;
  Eigen::VectorXd object_b;  // C + 1
  Eigen::MatrixXd relation_w;
  Eigen::VectorXd relation_b;  // R + 1
  Eigen::MatrixXd subject_mask_w;
  Eigen::VectorXd subject_mask_b;  // pixel feature width
  Eigen::MatrixXd object_mask_w;
  Eigen::VectorXd object_mask_b;

  std::size_t size() const;
  std::vector<double> flatten() const;
  void assign(std::span<const double> values);
  BranchParams zeros_like() const;
};

/// Fixed per-scene inputs: a context vector from the shared encoder and one
/// feature row per pixel.
struct SceneEncoding {
  Eigen::VectorXd context;  // D
  Eigen::MatrixXd pixels;   // (H * W) x pixel feature width
};

/// Desk-scale two-branch set predictor. A fixed random projection (the shared
/// encoder) turns a scene into a context vector; each branch owns Q query
/// vectors and linear heads. Mask logits are dot products of a per-query mask
/// embedding with per-pixel features.
class ToyModel {
 public:
  ToyModel() = default;
  static ToyModel initialize(std::int64_t num_object_classes, std::int64_t num_relation_classes,
                             std::int64_t grid_size, const ModelConfig& config,
                             std::uint64_t seed);

  std::int64_t num_object_classes() const { return num_classes_; }
  std::int64_t num_relation_classes() const { return num_relations_; }
  std::int64_t grid_size() const { return grid_; }
  std::int64_t num_queries() const { return num_queries_; }
  std::int64_t hidden_dim() const { return hidden_; }
  std::int64_t pixel_feature_width() const { return num_classes_ + 3; }

  BranchParams& branch(Branch b) { return branches_[static_cast<std::size_t>(b)]; }
  const BranchParams& branch(Branch b) const { return branches_[static_cast<std::size_t>(b)]; }

  SceneEncoding encode(const SceneGraph& scene) const;
  std::vector<PredictedTriplet> forward(Branch b, const SceneEncoding& enc) const;
  std::vector<PredictedTriplet> forward(Branch b, const SceneGraph& scene) const {
    return forward(b, encode(scene));
  }
  /// Accumulates parameter gradients of a loss given its gradients with respect
  /// to this branch's outputs.
  void backward(Branch b, const SceneEncoding& enc, std::span<const PredictedTriplet> output_grads,
                BranchParams& grads) const;

  /// Both branches' parameters, H-L first.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> values);

  nlohmann::json to_json() const;
  static ToyModel from_json(const nlohmann::json& j);

 private:
  std::int64_t num_classes_ = 0;
  std::int64_t num_relations_ = 0;
  std::int64_t grid_ = 0;
  std::int64_t num_queries_ = 0;
  std::int64_t hidden_ = 0;
  Eigen::MatrixXd projection_;       // D x (H * W * (C + 1))
  Eigen::VectorXd projection_bias_;  // D
  std::array<BranchParams, 2> branches_;
};

void save_model(const ToyModel& model, const std::filesystem::path& path);
ToyModel load_model(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  std::int64_t steps = 500;
  double learning_rate = 0.002;
  double margin = 0.5;
  bool use_rie = true;
  SwapMode swap_mode = SwapMode::Adjacent;
  ModelConfig model{};
  LossWeights weights{};
  std::uint64_t seed = 0;
};

struct TraceRow {
  std::int64_t step = 0;
  double total = 0.0;
  double baseline_hl = 0.0;
  double baseline_lh = 0.0;
  double object_consistency = 0.0;
  double relation_consistency = 0.0;
};

struct ObjectiveValue {
  TraceRow terms;               // scene means; `step` unused
  std::vector<double> gradient;  // matches ToyModel::parameters()
};

struct SceneAssignments {
  Assignment hl;
  Assignment lh;
};

/// The full training objective over a fixed dataset: mean over scenes of the
/// combined loss, with fresh Hungarian assignments at every evaluation.
class TrainingProblem {
 public:
  TrainingProblem(const Dataset& dataset, const TrainConfig& config);

  const Dataset& hl_data() const { return hl_.data; }
  const Dataset& lh_data() const { return lh_.data; }
  const RelationFrequencyTable& frequencies() const { return freq_; }

  ObjectiveValue evaluate(const ToyModel& model, bool with_gradient = true) const;
  /// Same parameters, different consistency options.
  ObjectiveValue evaluate(const ToyModel& model, const ConsistencyOptions& options,
                          bool with_gradient) const;
  /// Per-scene Hungarian assignments of both branches at the model's current
  /// parameters.
  std::vector<SceneAssignments> match(const ToyModel& model) const;
  /// The objective with the matching held fixed; the loss is smooth in the
  /// parameters only while the matching does not change.
  ObjectiveValue evaluate(const ToyModel& model, const ConsistencyOptions& options,
                          bool with_gradient, std::span<const SceneAssignments> fixed) const;
  ConsistencyOptions consistency() const { return {config_.margin, config_.use_rie}; }

 private:
  TrainConfig config_;
  RelationFrequencyTable freq_;
  SwappedDataset hl_;
  SwappedDataset lh_;
};

struct TrainResult {
  ToyModel model;
  std::vector<TraceRow> trace;  // steps + 1 rows; the last is after the final update
};

/// Plain gradient descent on TrainingProblem. Throws hilo::Error on a
/// non-finite loss.
TrainResult train(const Dataset& dataset, const TrainConfig& config);
/// Continues from an existing model.
TrainResult train(const Dataset& dataset, const TrainConfig& config, ToyModel model);

std::string trace_csv(std::span<const TraceRow> trace);

// ---------------------------------------------------------------------------
// Inference

/// Argmax classes with their probabilities and masks thresholded at
/// sigmoid >= 0.5; queries whose subject, object or relation argmax is the
/// padding class are dropped. Output keeps query order.
std::vector<ScoredTriplet> postprocess(std::span<const PredictedTriplet> preds,
                                       std::int64_t height, std::int64_t width);

struct BranchPredictions {
  std::vector<ScoredTriplet> hl;
  std::vector<ScoredTriplet> lh;
};

BranchPredictions predict(const ToyModel& model, const SceneGraph& scene);

/// Ranks a single branch the way fusion ranks its output.
std::vector<ScoredTriplet> rank_single(std::span<const ScoredTriplet> preds,
                                       double iou_thr = kDefaultFusionIou);

enum class InferenceMode { Fused, HLOnly, LHOnly, AverageTensor };

/// Ranked predictions for every scene of `dataset`.
std::vector<ScenePredictions> predict_dataset(const ToyModel& model, const Dataset& dataset,
                                              InferenceMode mode, int threads = 1,
                                              double iou_thr = kDefaultFusionIou);

/// Replaces each predicted mask by the ground-truth object mask it overlaps most
/// (empty when it overlaps none).
void snap_to_gt_masks(std::vector<ScoredTriplet>& preds, const SceneGraph& scene);

/// Mean softmax mass (renormalized over real relations) that a branch puts on
/// the less frequent half of the relations, over every query of every scene.
double low_frequency_mass(const ToyModel& model, Branch b, const Dataset& dataset,
                          const RelationFrequencyTable& freq);

// ---------------------------------------------------------------------------
// Ablations

struct AblationVariant {
  std::string name;
  std::vector<double> recall;       // per K
  std::vector<double> mean_recall;  // per K
  std::optional<double> final_loss;
};

struct AblationReport {
  std::string name;
  std::vector<std::int64_t> ks;
  std::vector<AblationVariant> variants;
  nlohmann::json details = nlohmann::json::object();
};

/// Trains and evaluates the variants of one ablation ("swap_mode", "rie",
/// "fusion" or "margin") on identical seeds. The test split is generated from
/// the same config with seed + 1.
AblationReport run_ablation(const std::string& name, const SynthConfig& synth,
                            const TrainConfig& train_config, const EvalConfig& eval = {});

nlohmann::json to_json(const AblationReport& report);
std::string format_table(const AblationReport& report);

// ---------------------------------------------------------------------------
// Configuration files

/// Missing keys keep their defaults; unknown keys are rejected.
SynthConfig synth_config_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);
EvalConfig eval_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthConfig& c);
nlohmann::json to_json(const TrainConfig& c);

}  // namespace hilo
