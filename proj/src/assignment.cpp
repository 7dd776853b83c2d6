// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#include "hilo/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "hilo/error.hpp"

namespace hilo {

CostMatrix::CostMatrix(std::int64_t rows, std::int64_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (static_cast<std::int64_t>(data_.size()) != rows * cols) {
    throw Error("cost matrix data does not match its dimensions");
  }
}

std::int64_t Assignment::query_for_gt(std::int64_t gt) const {
  for (const auto& [q, g] : pairs) {
    if (g == gt) return q;
  }
  return -1;
}

namespace {

// Square problem: column c < cols is a ground truth, c >= cols is a zero-cost
// dummy meaning "query left unmatched".
struct SquareSolver {
  std::int64_t n;
  std::int64_t cols;
  std::vector<double> a;  // a[c * n + q]
  std::vector<double> u, v;
  std::vector<std::int64_t> owner;   // column -> query
  std::vector<std::int64_t> col_of;  // query -> column
  std::vector<std::int64_t> initial_col_of;
  double tol = 0.0;

  double cost(std::int64_t c, std::int64_t q) const { return a[static_cast<std::size_t>(c * n + q)]; }

  void solve() {
    // Shortest augmenting path with potentials; rows of the textbook version
    // are columns here, 1-based with index 0 as the sentinel.
    const double inf = std::numeric_limits<double>::infinity();
    u.assign(n + 1, 0.0);
    v.assign(n + 1, 0.0);
    std::vector<std::int64_t> p(n + 1, 0), way(n + 1, 0);
    for (std::int64_t i = 1; i <= n; ++i) {
      p[0] = i;
      std::int64_t j0 = 0;
      std::vector<double> minv(n + 1, inf);
      std::vector<char> used(n + 1, 0);
      do {
        used[j0] = 1;
        const auto i0 = p[j0];
        double delta = inf;
        std::int64_t j1 = 0;
        for (std::int64_t j = 1; j <= n; ++j) {
          if (used[j]) continue;
          const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
          if (minv[j] < delta) {
            delta = minv[j];
            j1 = j;
          }
        }
        for (std::int64_t j = 0; j <= n; ++j) {
          if (used[j]) {
            u[p[j]] += delta;
            v[j] -= delta;
          } else {
            minv[j] -= delta;
          }
        }
        j0 = j1;
      } while (p[j0] != 0);
      do {
        const auto j1 = way[j0];
        p[j0] = p[j1];
        j0 = j1;
      } while (j0 != 0);
    }
    owner.assign(n, -1);
    col_of.assign(n, -1);
    for (std::int64_t j = 1; j <= n; ++j) {
      owner[p[j] - 1] = j - 1;
      col_of[j - 1] = p[j] - 1;
    }
    initial_col_of = col_of;
  }

  bool tight(std::int64_t q, std::int64_t c) const {
    return initial_col_of[q] == c || cost(c, q) - u[c + 1] - v[q + 1] <= tol;
  }

  // Alternating path from exposed column `x` to exposed query `target`, using
  // only tight edges and queries after `fixed_upto`.
  bool augment(std::int64_t x, std::int64_t target, std::int64_t fixed_upto,
               std::vector<char>& visited) {
    for (std::int64_t q = fixed_upto + 1; q < n; ++q) {
      if (visited[q] || !tight(q, x)) continue;
      visited[q] = 1;
      if (q == target || (col_of[q] >= 0 && augment(col_of[q], target, fixed_upto, visited))) {
        owner[x] = q;
        col_of[q] = x;
        return true;
      }
    }
    return false;
  }

  bool force(std::int64_t q, std::int64_t c) {
    const auto saved_owner = owner;
    const auto saved_col = col_of;
    const auto old_col = col_of[q];
    const auto displaced = owner[c];
    owner[c] = q;
    col_of[q] = c;
    col_of[displaced] = -1;
    owner[old_col] = -1;
    std::vector<char> visited(n, 0);
    if (augment(old_col, displaced, q, visited)) return true;
    owner = saved_owner;
    col_of = saved_col;
    return false;
  }

  // Walk queries in order, giving each the smallest ground truth that still
  // admits an optimal completion.
  void lexicographic_refine() {
    for (std::int64_t q = 0; q < n; ++q) {
      for (std::int64_t c = 0; c < cols; ++c) {
        if (col_of[q] == c) break;
        if (owner[c] < q || !tight(q, c)) continue;
        if (force(q, c)) break;
      }
    }
  }
};

}  // namespace

Assignment hungarian(const CostMatrix& cost) {
  const auto rows = cost.rows();
  const auto cols = cost.cols();
  if (rows < cols) {
    throw Error("hungarian: " + std::to_string(rows) + " queries cannot cover " +
                std::to_string(cols) + " ground truths");
  }
  double scale = 1.0;
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t c = 0; c < cols; ++c) {
      if (!std::isfinite(cost.at(r, c))) {
        throw Error("hungarian: non-finite cost at (" + std::to_string(r) + ", " +
                    std::to_string(c) + ")");
      }
      scale = std::max(scale, std::abs(cost.at(r, c)));
    }
  }
  Assignment out;
  if (cols == 0) {
    for (std::int64_t q = 0; q < rows; ++q) out.unmatched_queries.push_back(q);
    return out;
  }
  SquareSolver s;
  s.n = rows;
  s.cols = cols;
  s.a.assign(static_cast<std::size_t>(rows * rows), 0.0);
  for (std::int64_t c = 0; c < cols; ++c) {
    for (std::int64_t q = 0; q < rows; ++q) s.a[static_cast<std::size_t>(c * rows + q)] = cost.at(q, c);
  }
  s.tol = 1e-9 * scale;
  s.solve();
  s.lexicographic_refine();
  for (std::int64_t q = 0; q < rows; ++q) {
    if (s.col_of[q] < cols) {
      out.pairs.emplace_back(q, s.col_of[q]);
    } else {
      out.unmatched_queries.push_back(q);
    }
  }
  return out;
}

double assignment_cost(const CostMatrix& cost, const Assignment& assignment) {
  double total = 0.0;
  for (const auto& [q, g] : assignment.pairs) total += cost.at(q, g);
  return total;
}

namespace {

double match_cost_with_bits(const PredictedTriplet& pred, const RelationTriplet& gt,
                            std::int64_t subject_class, std::int64_t object_class,
                            std::span<const std::uint8_t> subject_bits,
                            std::span<const std::uint8_t> object_bits, const LossWeights& w) {
  const double cls = cross_entropy(pred.subject_logits, subject_class).value +
                     cross_entropy(pred.object_logits, object_class).value;
  const double mask = focal_loss(pred.subject_mask_logits, subject_bits, w.focal).value +
                      dice_loss(pred.subject_mask_logits, subject_bits, w.dice_smooth).value +
                      focal_loss(pred.object_mask_logits, object_bits, w.focal).value +
                      dice_loss(pred.object_mask_logits, object_bits, w.dice_smooth).value;
  const double rel = cross_entropy(pred.relation_logits, gt.relation_id).value;
  return w.so_cls * cls + w.so_mask * mask + w.rel_cls * rel;
}

void check_triplet(const RelationTriplet& gt, std::span<const ObjectInstance> objects) {
  const auto n = static_cast<std::int64_t>(objects.size());
  if (gt.subject_idx < 0 || gt.subject_idx >= n || gt.object_idx < 0 || gt.object_idx >= n) {
    throw Error("triplet references a missing object");
  }
}

}  // namespace

double triplet_match_cost(const PredictedTriplet& pred, const RelationTriplet& gt,
                          std::span<const ObjectInstance> objects, const LossWeights& weights) {
  check_triplet(gt, objects);
  const auto& s = objects[static_cast<std::size_t>(gt.subject_idx)];
  const auto& o = objects[static_cast<std::size_t>(gt.object_idx)];
  const auto sb = s.mask.to_bits();
  const auto ob = o.mask.to_bits();
  return match_cost_with_bits(pred, gt, s.class_id, o.class_id, sb, ob, weights);
}

CostMatrix build_cost_matrix(std::span<const PredictedTriplet> preds, const SceneGraph& scene,
                             const LossWeights& weights) {
  const auto rows = static_cast<std::int64_t>(preds.size());
  const auto cols = static_cast<std::int64_t>(scene.triplets.size());
  std::vector<std::vector<std::uint8_t>> bits;
  bits.reserve(scene.objects.size());
  for (const auto& o : scene.objects) bits.push_back(o.mask.to_bits());
  CostMatrix cost(rows, cols);
  for (std::int64_t c = 0; c < cols; ++c) {
    const auto& gt = scene.triplets[static_cast<std::size_t>(c)];
    check_triplet(gt, scene.objects);
    const auto si = static_cast<std::size_t>(gt.subject_idx);
    const auto oi = static_cast<std::size_t>(gt.object_idx);
    for (std::int64_t r = 0; r < rows; ++r) {
      cost.at(r, c) = match_cost_with_bits(preds[static_cast<std::size_t>(r)], gt,
                                           scene.objects[si].class_id, scene.objects[oi].class_id,
                                           bits[si], bits[oi], weights);
    }
  }
  return cost;
}

QueryCorrespondence build_correspondence(const Assignment& assign_hl, const Assignment& assign_lh,
                                         std::span<const std::int64_t> hl_labels,
                                         std::span<const std::int64_t> lh_labels) {
  if (hl_labels.size() != lh_labels.size()) {
    throw Error("build_correspondence: branches label different ground-truth sets (" +
                std::to_string(hl_labels.size()) + " vs " + std::to_string(lh_labels.size()) +
                " triplets)");
  }
  const auto m = static_cast<std::int64_t>(hl_labels.size());
  std::vector<std::int64_t> hl_q(m, -1), lh_q(m, -1);
  auto fill = [m](const Assignment& a, std::vector<std::int64_t>& dst, const char* branch) {
    for (const auto& [q, g] : a.pairs) {
      if (g < 0 || g >= m) {
        throw Error(std::string("build_correspondence: ") + branch + " assignment references gt " +
                    std::to_string(g) + " outside the labeled set");
      }
      dst[g] = q;
    }
  };
  fill(assign_hl, hl_q, "H-L");
  fill(assign_lh, lh_q, "L-H");
  QueryCorrespondence out;
  for (std::int64_t g = 0; g < m; ++g) {
    if (hl_q[g] >= 0 && lh_q[g] >= 0) {
      out.pairs.push_back({hl_q[g], lh_q[g], g, hl_labels[g], lh_labels[g]});
    } else if (hl_q[g] >= 0 || lh_q[g] >= 0) {
      out.one_sided_gts.push_back(g);
    }
  }
  return out;
}

}  // namespace hilo
