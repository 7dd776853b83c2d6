// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#include "hilo/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <tuple>

#include "hilo/error.hpp"
#include "hilo/assignment.hpp"
#include "hilo/hilo_loss.hpp"
#include "hilo/numerics.hpp"

namespace hilo {
namespace {

using Rng = std::mt19937_64;

std::vector<double> normal_vec(std::size_t n, double scale, Rng& rng) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

std::vector<std::uint8_t> random_bits(std::size_t n, Rng& rng) {
  std::bernoulli_distribution b(0.4);
  std::vector<std::uint8_t> v(n);
  for (auto& x : v) x = b(rng) ? 1 : 0;
  return v;
}

std::int64_t uniform_int(std::int64_t lo, std::int64_t hi, Rng& rng) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

std::vector<double> concat(const std::vector<std::vector<double>>& parts) {
  std::vector<double> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

struct Sizes {
  std::int64_t classes;
  std::int64_t relations;
  std::int64_t height;
  std::int64_t width;
};

PredictedTriplet random_triplet(const Sizes& s, Rng& rng) {
  const auto pixels = static_cast<std::size_t>(s.height * s.width);
  return {normal_vec(static_cast<std::size_t>(s.classes + 1), 1.5, rng),
          normal_vec(static_cast<std::size_t>(s.classes + 1), 1.5, rng),
          normal_vec(static_cast<std::size_t>(s.relations + 1), 1.5, rng),
          normal_vec(pixels, 1.0, rng), normal_vec(pixels, 1.0, rng)};
}

SceneGraph random_scene(const Sizes& s, std::int64_t num_triplets, Rng& rng) {
  SceneGraph g;
  g.scene_id = "gc";
  g.height = s.height;
  g.width = s.width;
  const auto n_obj = uniform_int(2, 3, rng);
  for (std::int64_t i = 0; i < n_obj; ++i) {
    g.objects.push_back({BinaryMask::from_bits(s.height, s.width,
                                               random_bits(static_cast<std::size_t>(s.height * s.width), rng)),
                         uniform_int(0, s.classes - 1, rng)});
  }
  for (std::int64_t t = 0; t < num_triplets; ++t) {
    const auto a = uniform_int(0, n_obj - 1, rng);
    auto b = uniform_int(0, n_obj - 2, rng);
    if (b >= a) ++b;
    g.triplets.push_back({a, b, uniform_int(0, s.relations - 1, rng)});
  }
  return g;
}

Assignment random_assignment(std::int64_t queries, std::int64_t gts, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> c(static_cast<std::size_t>(queries * gts));
  for (double& x : c) x = u(rng);
  return hungarian(CostMatrix(queries, gts, c));
}

class Checker {
 public:
  Checker(std::int64_t instances, double tolerance, double step)
      : instances_(instances), tolerance_(tolerance), step_(step) {}

  // `draw` returns (f, x, analytic gradient at x) for one random instance.
  using Instance = std::tuple<std::function<double(std::span<const double>)>, std::vector<double>,
                              std::vector<double>>;

  void run(const std::string& name, const std::function<Instance()>& draw) {
    GradCheckResult r{name, instances_, 0.0, true};
    for (std::int64_t i = 0; i < instances_; ++i) {
      const auto [f, x, g] = draw();
      r.max_rel_error = std::max(r.max_rel_error, finite_diff_check(f, x, g, step_));
    }
    r.passed = r.max_rel_error < tolerance_;
    results_.push_back(std::move(r));
  }

  std::vector<GradCheckResult> results() && { return std::move(results_); }

 private:
  std::int64_t instances_;
  double tolerance_;
  double step_;
  std::vector<GradCheckResult> results_;
};

}  // namespace

std::vector<GradCheckResult> run_gradient_suite(std::int64_t instances, std::uint64_t seed,
                                                double tolerance, double step) {
  if (instances <= 0) throw Error("gradient suite: instances must be positive");
  Rng rng(seed);
  Checker check(instances, tolerance, step);
  using Instance = Checker::Instance;

  check.run("cross_entropy", [&]() -> Instance {
    const auto n = static_cast<std::size_t>(uniform_int(2, 9, rng));
    auto x = normal_vec(n, 2.0, rng);
    const auto target = uniform_int(0, static_cast<std::int64_t>(n) - 1, rng);
    auto g = cross_entropy(x, target).grads[0];
    return {[target](std::span<const double> v) { return cross_entropy(v, target).value; }, x, g};
  });

  check.run("softmax", [&]() -> Instance {
    const auto n = static_cast<std::size_t>(uniform_int(2, 9, rng));
    auto x = normal_vec(n, 2.0, rng);
    const auto w = normal_vec(n, 1.0, rng);
    const auto f = [w](std::span<const double> v) {
      const auto p = softmax(v);
      double s = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) s += w[i] * p[i];
      return s;
    };
    return {f, x, softmax_backward(softmax(x), w)};
  });

  check.run("focal_loss", [&]() -> Instance {
    // Saturated logits with large gamma push true gradients below 1e-9, where
    // double-precision central differences are dominated by rounding.
    const auto n = static_cast<std::size_t>(uniform_int(1, 40, rng));
    auto x = normal_vec(n, 1.0, rng);
    const auto t = random_bits(n, rng);
    const FocalParams p{std::uniform_real_distribution<double>(0.5, 2.5)(rng),
                        std::uniform_real_distribution<double>(0.05, 0.95)(rng)};
    auto g = focal_loss(x, t, p).grads[0];
    return {[t, p](std::span<const double> v) { return focal_loss(v, t, p).value; }, x, g};
  });

  check.run("dice_loss", [&]() -> Instance {
    const auto n = static_cast<std::size_t>(uniform_int(1, 40, rng));
    auto x = normal_vec(n, 2.0, rng);
    const auto t = random_bits(n, rng);
    auto g = dice_loss(x, t, 1.0).grads[0];
    return {[t](std::span<const double> v) { return dice_loss(v, t, 1.0).value; }, x, g};
  });

  check.run("mse", [&]() -> Instance {
    const auto n = static_cast<std::size_t>(uniform_int(1, 20, rng));
    auto a = normal_vec(n, 1.0, rng);
    auto b = normal_vec(n, 1.0, rng);
    const auto r = mse(a, b);
    auto x = concat({a, b});
    const auto f = [n](std::span<const double> v) { return mse(v.first(n), v.subspan(n)).value; };
    return {f, x, concat(r.grads)};
  });

  const auto draw_pair = [&](std::int64_t relations) {
    const auto n = static_cast<std::size_t>(relations + 1);
    auto hl = normal_vec(n, 1.5, rng);
    auto lh = normal_vec(n, 1.5, rng);
    const auto a = uniform_int(0, relations - 1, rng);
    auto b = uniform_int(0, relations - 2, rng);
    if (b >= a) ++b;
    return std::make_tuple(hl, lh, pair_swap_map(a, b));
  };

  check.run("subject_object_consistency", [&]() -> Instance {
    const Sizes s{uniform_int(2, 5, rng), uniform_int(2, 5, rng), 3, 3};
    const auto a = random_triplet(s, rng);
    const auto b = random_triplet(s, rng);
    const std::vector<PredictedTriplet> like{a, b};
    const auto f = [like](std::span<const double> v) {
      const auto t = unflatten(v, like);
      return subject_object_consistency(t[0], t[1]).value;
    };
    return {f, flatten(like), concat(subject_object_consistency(a, b).grads)};
  });

  check.run("hilo_distance", [&]() -> Instance {
    const auto [hl, lh, map] = draw_pair(uniform_int(2, 8, rng));
    const auto n = hl.size();
    const auto f = [n, map = map](std::span<const double> v) {
      return hilo_distance(v.first(n), v.subspan(n), map).value;
    };
    return {f, concat({hl, lh}), concat(hilo_distance(hl, lh, map).grads)};
  });

  for (bool use_rie : {true, false}) {
    check.run(use_rie ? "relation_consistency" : "relation_consistency_no_rie", [&]() -> Instance {
      for (;;) {
        const auto [hl, lh, map] = draw_pair(uniform_int(2, 8, rng));
        const auto n = hl.size();
        const double margin = std::uniform_real_distribution<double>(0.0, 0.6)(rng);
        // The hinge has a kink at D == margin; instances near it are redrawn.
        const double dist = relation_consistency(hl, lh, map, 0.0, use_rie).value;
        if (std::abs(dist - margin) < 1e-3) continue;
        const auto r = relation_consistency(hl, lh, map, margin, use_rie);
        const auto f = [n, map = map, margin, use_rie](std::span<const double> v) {
          return relation_consistency(v.first(n), v.subspan(n), map, margin, use_rie).value;
        };
        return {f, concat({hl, lh}), concat(r.grads)};
      }
    });
  }

  check.run("baseline_loss", [&]() -> Instance {
    const Sizes s{uniform_int(2, 4, rng), uniform_int(2, 4, rng), 3, 3};
    const auto queries = uniform_int(1, 3, rng);
    const auto scene = random_scene(s, uniform_int(0, queries, rng), rng);
    std::vector<PredictedTriplet> preds;
    for (std::int64_t q = 0; q < queries; ++q) preds.push_back(random_triplet(s, rng));
    const auto assign = random_assignment(queries, static_cast<std::int64_t>(scene.triplets.size()), rng);
    const auto f = [preds, scene, assign](std::span<const double> v) {
      return baseline_loss(unflatten(v, preds), scene, assign).value;
    };
    return {f, flatten(preds), concat(baseline_loss(preds, scene, assign).grads)};
  });

  check.run("total_loss", [&]() -> Instance {
    const Sizes s{uniform_int(2, 4, rng), uniform_int(2, 4, rng), 3, 3};
    const auto queries = uniform_int(1, 3, rng);
    const auto hl_scene = random_scene(s, uniform_int(1, queries, rng), rng);
    auto lh_scene = hl_scene;
    for (auto& t : lh_scene.triplets) {
      if (std::bernoulli_distribution(0.5)(rng)) t.relation_id = uniform_int(0, s.relations - 1, rng);
    }
    std::vector<PredictedTriplet> hl, lh;
    for (std::int64_t q = 0; q < queries; ++q) hl.push_back(random_triplet(s, rng));
    for (std::int64_t q = 0; q < queries; ++q) lh.push_back(random_triplet(s, rng));
    const auto gts = static_cast<std::int64_t>(hl_scene.triplets.size());
    const auto assign_hl = random_assignment(queries, gts, rng);
    const auto assign_lh = random_assignment(queries, gts, rng);
    std::vector<std::int64_t> hl_labels, lh_labels;
    for (const auto& t : hl_scene.triplets) hl_labels.push_back(t.relation_id);
    for (const auto& t : lh_scene.triplets) lh_labels.push_back(t.relation_id);
    const auto corr = build_correspondence(assign_hl, assign_lh, hl_labels, lh_labels);
    // A zero margin keeps the hinge active wherever the distance is positive.
    const ConsistencyOptions opts{0.0, std::bernoulli_distribution(0.5)(rng)};
    const auto r = total_loss(hl, lh, hl_scene, lh_scene, assign_hl, assign_lh, corr, opts);
    const auto f = [=](std::span<const double> v) {
      const auto split = flatten(hl).size();
      const auto th = unflatten(v.first(split), hl);
      const auto tl = unflatten(v.subspan(split), lh);
      return total_loss(th, tl, hl_scene, lh_scene, assign_hl, assign_lh, corr, opts).report.value;
    };
    std::vector<double> x = flatten(hl);
    const auto tail = flatten(lh);
    x.insert(x.end(), tail.begin(), tail.end());
    return {f, x, concat(r.report.grads)};
  });

  return std::move(check).results();
}

}  // namespace hilo
