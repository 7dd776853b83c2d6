// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#include <iomanip>
#include <sstream>

#include "hilo/error.hpp"
#include "hilo/toytrain.hpp"

namespace hilo {
namespace {

nlohmann::json k_label(std::int64_t k) {
  return k == kAllPredictions ? nlohmann::json("all") : nlohmann::json(k);
}

AblationVariant score(const std::string& name, const ToyModel& model, const Dataset& test,
                      InferenceMode mode, const EvalConfig& eval,
                      std::optional<double> final_loss) {
  const auto preds = predict_dataset(model, test, mode);
  const auto report = evaluate(test, preds, eval);
  return {name, report.recall, report.mean_recall, final_loss};
}

std::int64_t swapped_pair_count(const Dataset& d, const RelationFrequencyTable& freq) {
  const auto hl = swap_relations(d, freq, {SwapTarget::HL, SwapStrategy::Adjacent});
  const auto lh = swap_relations(d, freq, {SwapTarget::LH, SwapStrategy::Adjacent});
  std::int64_t n = 0;
  for (std::size_t s = 0; s < d.scenes.size(); ++s) {
    for (std::size_t t = 0; t < d.scenes[s].triplets.size(); ++t) {
      if (hl.data.scenes[s].triplets[t].relation_id != lh.data.scenes[s].triplets[t].relation_id) ++n;
    }
  }
  return n;
}

}  // namespace

AblationReport run_ablation(const std::string& name, const SynthConfig& synth,
                            const TrainConfig& train_config, const EvalConfig& eval) {
  if (name != "swap_mode" && name != "rie" && name != "fusion" && name != "margin") {
    throw Error("unknown ablation '" + name + "' (expected swap_mode, rie, fusion or margin)");
  }
  eval.validate();
  const auto train_set = generate_synthetic(synth);
  auto test_cfg = synth;
  test_cfg.seed = synth.seed + 1;
  test_cfg.scene_prefix = synth.scene_prefix + "_test";
  const auto test_set = generate_synthetic(test_cfg);

  AblationReport report;
  report.name = name;
  report.ks = eval.ks;

  const auto run = [&](const std::string& label, TrainConfig cfg) {
    const auto result = train(train_set, cfg);
    report.variants.push_back(
        score(label, result.model, test_set, InferenceMode::Fused, eval, result.trace.back().total));
  };

  if (name == "swap_mode") {
    for (auto mode : {SwapMode::Adjacent, SwapMode::Extreme, SwapMode::None}) {
      auto cfg = train_config;
      cfg.swap_mode = mode;
      run(mode == SwapMode::None ? "no_swap" : to_string(mode), cfg);
    }
  } else if (name == "rie") {
    // Both losses on the same initial parameters isolate the relation term.
    const auto model =
        ToyModel::initialize(train_set.num_object_classes(), train_set.num_relation_classes(),
                             synth.grid_size, train_config.model, train_config.seed);
    const TrainingProblem problem(train_set, train_config);
    const auto with_rie = problem.evaluate(model, {train_config.margin, true}, false).terms;
    const auto without = problem.evaluate(model, {train_config.margin, false}, false).terms;
    report.details["initial_relation_consistency_rie"] = with_rie.relation_consistency;
    report.details["initial_relation_consistency_no_rie"] = without.relation_consistency;
    report.details["initial_other_terms_equal"] =
        with_rie.baseline_hl == without.baseline_hl && with_rie.baseline_lh == without.baseline_lh &&
        with_rie.object_consistency == without.object_consistency;
    report.details["swapped_pairs"] = swapped_pair_count(train_set, problem.frequencies());
    for (bool use : {true, false}) {
      auto cfg = train_config;
      cfg.use_rie = use;
      run(use ? "rie" : "no_rie", cfg);
    }
  } else if (name == "fusion") {
    const auto result = train(train_set, train_config);
    const auto loss = result.trace.back().total;
    report.variants.push_back(score("fused", result.model, test_set, InferenceMode::Fused, eval, loss));
    report.variants.push_back(score("hl_only", result.model, test_set, InferenceMode::HLOnly, eval, loss));
    report.variants.push_back(score("lh_only", result.model, test_set, InferenceMode::LHOnly, eval, loss));
    report.variants.push_back(
        score("average_tensor", result.model, test_set, InferenceMode::AverageTensor, eval, loss));
  } else {
    for (double m : {0.0, 0.25, 0.5, 1.0}) {
      auto cfg = train_config;
      cfg.margin = m;
      std::ostringstream label;
      label << "margin_" << m;
      run(label.str(), cfg);
    }
  }
  report.details["train_scenes"] = train_set.scenes.size();
  report.details["test_scenes"] = test_set.scenes.size();
  return report;
}

nlohmann::json to_json(const AblationReport& report) {
  nlohmann::json j;
  j["ablation"] = report.name;
  j["ks"] = nlohmann::json::array();
  for (auto k : report.ks) j["ks"].push_back(k_label(k));
  j["variants"] = nlohmann::json::array();
  for (const auto& v : report.variants) {
    nlohmann::json row{{"name", v.name}, {"recall", v.recall}, {"mean_recall", v.mean_recall}};
    row["final_loss"] = v.final_loss ? nlohmann::json(*v.final_loss) : nlohmann::json(nullptr);
    j["variants"].push_back(std::move(row));
  }
  j["details"] = report.details;
  return j;
}

std::string format_table(const AblationReport& report) {
  std::ostringstream out;
  out << "ablation: " << report.name << '\n';
  out << std::left << std::setw(18) << "variant";
  for (auto k : report.ks) {
    const auto label = k == kAllPredictions ? std::string("all") : std::to_string(k);
    out << std::right << std::setw(10) << ("R@" + label) << std::setw(10) << ("mR@" + label);
  }
  out << std::setw(12) << "final_loss" << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& v : report.variants) {
    out << std::left << std::setw(18) << v.name << std::right;
    for (std::size_t i = 0; i < report.ks.size(); ++i) {
      out << std::setw(10) << v.recall[i] << std::setw(10) << v.mean_recall[i];
    }
    if (v.final_loss) {
      out << std::setw(12) << *v.final_loss;
    } else {
      out << std::setw(12) << "-";
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace hilo
