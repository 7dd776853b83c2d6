// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <iomanip>
#include <sstream>

#include "hilo/error.hpp"
#include "hilo/toytrain.hpp"

namespace hilo {
namespace {

SwappedDataset unswapped(const Dataset& dataset) {
  SwappedDataset out{dataset, {}};
  for (const auto& s : dataset.scenes) {
    std::vector<SwapOrigin> row;
    for (const auto& t : s.triplets) row.push_back({t.relation_id, 0, 1});
    out.origins.push_back(std::move(row));
  }
  return out;
}

SwappedDataset relabel(const Dataset& dataset, const RelationFrequencyTable& freq, SwapMode mode,
                       SwapTarget target) {
  if (mode == SwapMode::None) return unswapped(dataset);
  const auto strategy = mode == SwapMode::Adjacent ? SwapStrategy::Adjacent : SwapStrategy::Extreme;
  return swap_relations(dataset, freq, {target, strategy});
}

std::vector<std::int64_t> labels_of(const SceneGraph& scene) {
  std::vector<std::int64_t> out;
  for (const auto& t : scene.triplets) out.push_back(t.relation_id);
  return out;
}

std::vector<PredictedTriplet> scaled(std::vector<PredictedTriplet> grads, double scale) {
  for (auto& g : grads) {
    for (auto* v : {&g.subject_logits, &g.object_logits, &g.relation_logits,
                    &g.subject_mask_logits, &g.object_mask_logits}) {
      for (double& x : *v) x *= scale;
    }
  }
  return grads;
}

}  // namespace

SwapMode parse_swap_mode(const std::string& s) {
  if (s == "none") return SwapMode::None;
  if (s == "adjacent") return SwapMode::Adjacent;
  if (s == "extreme") return SwapMode::Extreme;
  throw Error("unknown swap mode '" + s + "' (expected none, adjacent or extreme)");
}

std::string to_string(SwapMode mode) {
  switch (mode) {
    case SwapMode::None:
      return "none";
    case SwapMode::Adjacent:
      return "adjacent";
    case SwapMode::Extreme:
      return "extreme";
  }
  return "none";
}

TrainingProblem::TrainingProblem(const Dataset& dataset, const TrainConfig& config)
    : config_(config), freq_(compute_frequency_table(dataset)) {
  if (dataset.scenes.empty()) throw Error("training: dataset has no scenes");
  validate(dataset);
  hl_ = relabel(dataset, freq_, config.swap_mode, SwapTarget::HL);
  lh_ = relabel(dataset, freq_, config.swap_mode, SwapTarget::LH);
}

ObjectiveValue TrainingProblem::evaluate(const ToyModel& model, bool with_gradient) const {
  return evaluate(model, ConsistencyOptions{config_.margin, config_.use_rie}, with_gradient);
}

ObjectiveValue TrainingProblem::evaluate(const ToyModel& model, const ConsistencyOptions& options,
                                         bool with_gradient) const {
  return evaluate(model, options, with_gradient, match(model));
}

std::vector<SceneAssignments> TrainingProblem::match(const ToyModel& model) const {
  std::vector<SceneAssignments> out;
  out.reserve(hl_.data.scenes.size());
  for (std::size_t i = 0; i < hl_.data.scenes.size(); ++i) {
    const auto& shl = hl_.data.scenes[i];
    const auto& slh = lh_.data.scenes[i];
    if (static_cast<std::int64_t>(shl.triplets.size()) > model.num_queries()) {
      throw Error("scene '" + shl.scene_id + "' has " + std::to_string(shl.triplets.size()) +
                  " triplets but the model only has " + std::to_string(model.num_queries()) +
                  " queries");
    }
    const auto enc = model.encode(shl);
    out.push_back({hungarian(build_cost_matrix(model.forward(Branch::HL, enc), shl, config_.weights)),
                   hungarian(build_cost_matrix(model.forward(Branch::LH, enc), slh, config_.weights))});
  }
  return out;
}

ObjectiveValue TrainingProblem::evaluate(const ToyModel& model, const ConsistencyOptions& options,
                                         bool with_gradient,
                                         std::span<const SceneAssignments> fixed) const {
  const auto& scenes_hl = hl_.data.scenes;
  const auto& scenes_lh = lh_.data.scenes;
  if (fixed.size() != scenes_hl.size()) throw Error("evaluate: need one assignment pair per scene");
  const double inv = 1.0 / static_cast<double>(scenes_hl.size());
  ObjectiveValue out;
  BranchParams grad_hl = model.branch(Branch::HL).zeros_like();
  BranchParams grad_lh = model.branch(Branch::LH).zeros_like();
  const auto q = static_cast<std::size_t>(model.num_queries());

  for (std::size_t i = 0; i < scenes_hl.size(); ++i) {
    const auto& shl = scenes_hl[i];
    const auto& slh = scenes_lh[i];
    const auto enc = model.encode(shl);
    const auto hl = model.forward(Branch::HL, enc);
    const auto lh = model.forward(Branch::LH, enc);
    const auto& [assign_hl, assign_lh] = fixed[i];
    const auto corr = build_correspondence(assign_hl, assign_lh, labels_of(shl), labels_of(slh));
    const auto loss =
        total_loss(hl, lh, shl, slh, assign_hl, assign_lh, corr, options, config_.weights);

    out.terms.total += inv * loss.report.value;
    out.terms.baseline_hl += inv * loss.baseline_hl;
    out.terms.baseline_lh += inv * loss.baseline_lh;
    out.terms.object_consistency += inv * loss.object_consistency;
    out.terms.relation_consistency += inv * loss.relation_consistency;
    if (with_gradient) {
      model.backward(Branch::HL, enc, scaled(triplets_from_slots(loss.report, 0, q), inv), grad_hl);
      model.backward(Branch::LH, enc,
                     scaled(triplets_from_slots(loss.report, q * kTripletSlots, q), inv), grad_lh);
    }
  }
  if (with_gradient) {
    out.gradient = grad_hl.flatten();
    const auto tail = grad_lh.flatten();
    out.gradient.insert(out.gradient.end(), tail.begin(), tail.end());
  }
  return out;
}

TrainResult train(const Dataset& dataset, const TrainConfig& config) {
  if (dataset.scenes.empty()) throw Error("training: dataset has no scenes");
  const auto grid = dataset.scenes.front().height;
  return train(dataset, config,
               ToyModel::initialize(dataset.num_object_classes(), dataset.num_relation_classes(),
                                    grid, config.model, config.seed));
}

TrainResult train(const Dataset& dataset, const TrainConfig& config, ToyModel model) {
  if (config.steps < 0) throw Error("training: steps must be non-negative");
  if (!std::isfinite(config.learning_rate) || config.learning_rate < 0.0) {
    throw Error("training: learning_rate must be finite and non-negative");
  }
  if (config.margin < 0.0) throw Error("training: margin must be non-negative");
  const TrainingProblem problem(dataset, config);
  TrainResult result;
  auto params = model.parameters();
  for (std::int64_t step = 0; step <= config.steps; ++step) {
    const bool last = step == config.steps;
    auto value = problem.evaluate(model, !last);
    value.terms.step = step;
    if (!std::isfinite(value.terms.total)) {
      throw Error("training diverged at step " + std::to_string(step) +
                  ": non-finite loss (learning_rate " + std::to_string(config.learning_rate) + ")");
    }
    result.trace.push_back(value.terms);
    if (last) break;
    for (std::size_t i = 0; i < params.size(); ++i) {
      params[i] -= config.learning_rate * value.gradient[i];
    }
    model.set_parameters(params);
  }
  result.model = std::move(model);
  return result;
}

std::string trace_csv(std::span<const TraceRow> trace) {
  std::ostringstream out;
  out << "step,total,baseline_hl,baseline_lh,object_consistency,relation_consistency\n";
  out << std::setprecision(17);
  for (const auto& r : trace) {
    out << r.step << ',' << r.total << ',' << r.baseline_hl << ',' << r.baseline_lh << ','
        << r.object_consistency << ',' << r.relation_consistency << '\n';
  }
  return out.str();
}

}  // namespace hilo
