// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <cstdlib>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "hilo/error.hpp"
#include "hilo/gradcheck.hpp"
#include "hilo/toytrain.hpp"

namespace hilo::cli {
namespace {

std::shared_ptr<spdlog::logger> logger() {
  static const auto log = [] {
    auto l = std::make_shared<spdlog::logger>("hilo", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    l->set_pattern("[%l] %v");
    return l;
  }();
  return log;
}

void configure_logging() {
  const char* env = std::getenv("HILO_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") {
    logger()->set_level(spdlog::level::err);
  } else if (level == "debug") {
    logger()->set_level(spdlog::level::debug);
  } else {
    logger()->set_level(spdlog::level::info);
    if (level != "info") logger()->warn("HILO_LOG='{}' not recognized; using info", level);
  }
}

struct Config {
  SynthConfig synth;
  TrainConfig train;
  EvalConfig eval;
};

Config load_config(const std::string& path) {
  Config c;
  if (path.empty()) return c;
  const auto j = read_json_file(path);
  if (!j.is_object()) throw ParseError(path + ": config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "synth") {
      c.synth = synth_config_from_json(value);
    } else if (key == "train") {
      c.train = train_config_from_json(value);
    } else if (key == "eval") {
      c.eval = eval_config_from_json(value);
    } else {
      throw ParseError(path + ": unknown config section '" + key + "'");
    }
  }
  return c;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

InferenceMode parse_inference(const std::string& s) {
  if (s == "fused") return InferenceMode::Fused;
  if (s == "hl") return InferenceMode::HLOnly;
  if (s == "lh") return InferenceMode::LHOnly;
  if (s == "average") return InferenceMode::AverageTensor;
  throw Error("unknown inference mode '" + s + "'");
}

nlohmann::json stats_json(const Dataset& d) {
  const auto freq = compute_frequency_table(d);
  nlohmann::json counts = nlohmann::json::object();
  std::int64_t objects = 0;
  for (const auto& s : d.scenes) objects += static_cast<std::int64_t>(s.objects.size());
  for (std::size_t r = 0; r < freq.counts.size(); ++r) counts[d.relation_class_names[r]] = freq.counts[r];
  nlohmann::json order = nlohmann::json::array();
  for (auto r : freq.descending_order()) order.push_back(d.relation_class_names[static_cast<std::size_t>(r)]);
  return {{"scenes", d.scenes.size()},
          {"objects", objects},
          {"triplets", d.triplet_count()},
          {"relation_counts", counts},
          {"relations_by_frequency", order},
          {"multi_relation_pair_fraction", multi_relation_pair_fraction(d)}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_logging();
  CLI::App app{"Scene-graph relation debiasing toolkit: relabeling, two-branch losses, fusion and evaluation",
               "hilo"};
  app.require_subcommand(1, 1);

  std::string dataset, scores, direction = "hl", mode, config_path, out_path, model_path;
  std::string gt_path, pred_path, hl_path, lh_path, out_hl, out_lh, trace_path, ks_text;
  std::string inference = "fused", ablation;
  std::optional<double> margin, iou_thr;
  std::optional<std::int64_t> steps;
  std::optional<std::uint64_t> seed;
  bool no_rie = false, table = false;
  int threads = 1;
  std::int64_t instances = 100;

  auto* validate_cmd = app.add_subcommand("validate", "Check a dataset against the schema and invariants");
  validate_cmd->add_option("--dataset", dataset, "Dataset JSON")->required();

  auto* stats_cmd = app.add_subcommand("stats", "Relation frequencies and multi-relation pair share");
  stats_cmd->add_option("--dataset", dataset, "Dataset JSON")->required();
  stats_cmd->add_option("--out", out_path, "Output JSON (default stdout)");

  auto* augment_cmd = app.add_subcommand("augment", "Add relations that beat the per-pair threshold");
  augment_cmd->add_option("--dataset", dataset, "Dataset JSON")->required();
  augment_cmd->add_option("--scores", scores, "PairScores JSON (default: synthetic scores from --seed)");
  augment_cmd->add_option("--seed", seed, "Seed for synthetic scores");
  augment_cmd->add_option("--out", out_path, "Output dataset JSON")->required();

  auto* swap_cmd = app.add_subcommand("swap", "Relabel multi-relation pairs toward rare (hl) or frequent (lh) relations");
  swap_cmd->add_option("--dataset", dataset, "Dataset JSON")->required();
  swap_cmd->add_option("--direction", direction, "hl or lh")->check(CLI::IsMember({"hl", "lh"}));
  swap_cmd->add_option("--mode", mode, "adjacent or extreme")->check(CLI::IsMember({"adjacent", "extreme"}));
  swap_cmd->add_option("--out", out_path, "Output dataset JSON")->required();

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--config", config_path, "Config JSON (synth section)");
  synth_cmd->add_option("--seed", seed, "Generator seed");
  synth_cmd->add_option("--out", out_path, "Output dataset JSON")->required();
  synth_cmd->add_option("--scores", scores, "Also write synthetic PairScores here");

  auto* train_cmd = app.add_subcommand("train", "Train the two-branch toy model");
  train_cmd->add_option("--dataset", dataset, "Dataset JSON (default: synthetic from the config)");
  train_cmd->add_option("--config", config_path, "Config JSON");
  train_cmd->add_option("--out", out_path, "Output model JSON")->required();
  train_cmd->add_option("--trace", trace_path, "Loss trace CSV");
  train_cmd->add_option("--margin", margin, "Relation consistency margin");
  train_cmd->add_flag("--no-rie", no_rie, "Drop the index exchange from the relation consistency loss");
  train_cmd->add_option("--mode", mode, "Swap mode: none, adjacent or extreme")
      ->check(CLI::IsMember({"none", "adjacent", "extreme"}));
  train_cmd->add_option("--steps", steps, "Gradient steps");
  train_cmd->add_option("--seed", seed, "Initialization seed");

  auto* predict_cmd = app.add_subcommand("predict", "Run a trained model over a dataset");
  predict_cmd->add_option("--model", model_path, "Model JSON")->required();
  predict_cmd->add_option("--dataset", dataset, "Dataset JSON")->required();
  predict_cmd->add_option("--out", out_path, "Ranked predictions (see --inference)");
  predict_cmd->add_option("--out-hl", out_hl, "Unranked H-L branch predictions");
  predict_cmd->add_option("--out-lh", out_lh, "Unranked L-H branch predictions");
  predict_cmd->add_option("--inference", inference, "fused, hl, lh or average")
      ->check(CLI::IsMember({"fused", "hl", "lh", "average"}));
  predict_cmd->add_option("--iou-thr", iou_thr, "Duplicate IoU threshold");
  predict_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* fuse_cmd = app.add_subcommand("fuse", "Merge two branches' prediction files");
  fuse_cmd->add_option("--hl", hl_path, "H-L predictions")->required();
  fuse_cmd->add_option("--lh", lh_path, "L-H predictions")->required();
  fuse_cmd->add_option("--iou-thr", iou_thr, "Duplicate IoU threshold");
  fuse_cmd->add_option("--out", out_path, "Output predictions (default stdout)");

  auto* eval_cmd = app.add_subcommand("eval", "Recall and mean recall at K");
  eval_cmd->add_option("--gt", gt_path, "Ground-truth dataset JSON")->required();
  eval_cmd->add_option("--pred", pred_path, "Ranked predictions JSON")->required();
  eval_cmd->add_option("--k", ks_text, "Comma-separated K values, 'all' for every prediction");
  eval_cmd->add_option("--iou-thr", iou_thr, "Mask IoU threshold");
  eval_cmd->add_option("--config", config_path, "Config JSON (eval section)");
  eval_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--out", out_path, "Also write the report JSON here");
  eval_cmd->add_flag("--table", table, "Print a text table instead of JSON");

  auto* ablate_cmd = app.add_subcommand("ablate", "Train and compare variants");
  ablate_cmd->add_option("--name", ablation, "swap_mode, rie, fusion or margin")
      ->required()
      ->check(CLI::IsMember({"swap_mode", "rie", "fusion", "margin"}));
  ablate_cmd->add_option("--config", config_path, "Config JSON");
  ablate_cmd->add_option("--seed", seed, "Seed for data and initialization");
  ablate_cmd->add_option("--steps", steps, "Gradient steps per variant");
  ablate_cmd->add_option("--out", out_path, "Output report JSON (default stdout)");
  ablate_cmd->add_flag("--table", table, "Print a text table as well");

  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every gradient");
  gradcheck_cmd->add_option("--instances", instances, "Random instances per kernel")->check(CLI::PositiveNumber);
  gradcheck_cmd->add_option("--seed", seed, "Instance seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kExitUsage;
  }

  try {
    if (*validate_cmd) {
      const auto d = load_dataset(dataset);
      out << "ok: " << d.scenes.size() << " scenes, " << d.triplet_count() << " triplets\n";
    } else if (*stats_cmd) {
      emit(canonical_dump(stats_json(load_dataset(dataset))), out_path, out);
    } else if (*augment_cmd) {
      const auto d = load_dataset(dataset);
      const auto pair_scores = scores.empty() ? synthesize_pair_scores(d, seed.value_or(0))
                                              : load_pair_scores(scores);
      const auto augmented = augment_relations(d, pair_scores);
      logger()->info("multi-relation pair fraction {:.4f} -> {:.4f}; triplets {} -> {}",
                     multi_relation_pair_fraction(d), multi_relation_pair_fraction(augmented),
                     d.triplet_count(), augmented.triplet_count());
      save_dataset(augmented, out_path);
    } else if (*swap_cmd) {
      const auto d = load_dataset(dataset);
      const SwapDirection dir{parse_swap_target(direction),
                              parse_swap_strategy(mode.empty() ? "adjacent" : mode)};
      save_dataset(swap_relations(d, compute_frequency_table(d), dir).data, out_path);
    } else if (*synth_cmd) {
      auto cfg = load_config(config_path).synth;
      if (seed) cfg.seed = *seed;
      const auto d = generate_synthetic(cfg);
      save_dataset(d, out_path);
      if (!scores.empty()) write_text_file(scores, canonical_dump(to_json(synthesize_pair_scores(d, cfg.seed))));
      logger()->info("wrote {} scenes, {} triplets", d.scenes.size(), d.triplet_count());
    } else if (*train_cmd) {
      auto cfg = load_config(config_path);
      if (margin) cfg.train.margin = *margin;
      if (no_rie) cfg.train.use_rie = false;
      if (!mode.empty()) cfg.train.swap_mode = parse_swap_mode(mode);
      if (steps) cfg.train.steps = *steps;
      if (seed) cfg.train.seed = *seed;
      const auto d = dataset.empty() ? generate_synthetic(cfg.synth) : load_dataset(dataset);
      logger()->info("training {} steps on {} scenes (swap {}, margin {}, rie {})", cfg.train.steps,
                     d.scenes.size(), to_string(cfg.train.swap_mode), cfg.train.margin,
                     cfg.train.use_rie ? "on" : "off");
      const auto result = train(d, cfg.train);
      logger()->info("loss {:.6f} -> {:.6f}", result.trace.front().total, result.trace.back().total);
      save_model(result.model, out_path);
      if (!trace_path.empty()) write_text_file(trace_path, trace_csv(result.trace));
    } else if (*predict_cmd) {
      if (out_path.empty() && out_hl.empty() && out_lh.empty()) {
        err << "error: predict needs at least one of --out, --out-hl, --out-lh\n";
        return kExitUsage;
      }
      const auto model = load_model(model_path);
      const auto d = load_dataset(dataset);
      const double thr = iou_thr.value_or(kDefaultFusionIou);
      if (!out_path.empty()) {
        save_predictions(predict_dataset(model, d, parse_inference(inference), threads, thr), out_path);
      }
      if (!out_hl.empty() || !out_lh.empty()) {
        std::vector<ScenePredictions> hl(d.scenes.size()), lh(d.scenes.size());
        for (std::size_t i = 0; i < d.scenes.size(); ++i) {
          const auto& s = d.scenes[i];
          auto p = predict(model, s);
          hl[i] = {s.scene_id, s.height, s.width, std::move(p.hl)};
          lh[i] = {s.scene_id, s.height, s.width, std::move(p.lh)};
        }
        if (!out_hl.empty()) save_predictions(hl, out_hl);
        if (!out_lh.empty()) save_predictions(lh, out_lh);
      }
    } else if (*fuse_cmd) {
      const auto fused = fuse_scenes(load_predictions(hl_path), load_predictions(lh_path),
                                     iou_thr.value_or(kDefaultFusionIou));
      emit(canonical_dump(to_json(fused)), out_path, out);
    } else if (*eval_cmd) {
      auto cfg = load_config(config_path).eval;
      if (!ks_text.empty()) cfg.ks = parse_ks(ks_text);
      if (iou_thr) cfg.iou_thr = *iou_thr;
      const auto gt = load_dataset(gt_path);
      const auto report = evaluate(gt, load_predictions(pred_path), cfg, threads);
      const auto text = canonical_dump(to_json(report, gt.relation_class_names));
      if (!out_path.empty()) write_text_file(out_path, text);
      out << (table ? format_table(report, gt.relation_class_names) : text);
    } else if (*ablate_cmd) {
      auto cfg = load_config(config_path);
      if (seed) {
        cfg.synth.seed = *seed;
        cfg.train.seed = *seed;
      }
      if (steps) cfg.train.steps = *steps;
      const auto report = run_ablation(ablation, cfg.synth, cfg.train, cfg.eval);
      emit(canonical_dump(to_json(report)), out_path, out);
      if (table) err << format_table(report);
    } else if (*gradcheck_cmd) {
      bool all = true;
      for (const auto& r : run_gradient_suite(instances, seed.value_or(0))) {
        out << (r.passed ? "PASS " : "FAIL ") << r.kernel << " instances=" << r.instances
            << " max_rel_err=" << r.max_rel_error << '\n';
        all = all && r.passed;
      }
      return all ? kExitOk : kExitDomainError;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  }
  return kExitOk;
}

}  // namespace hilo::cli
