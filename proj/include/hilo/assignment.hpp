// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hilo/prediction.hpp"
#include "hilo/scene.hpp"

namespace hilo {

/// Row-major cost matrix: rows are queries, columns are ground-truth triplets.
class CostMatrix {
 public:
  CostMatrix(std::int64_t rows, std::int64_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), fill) {}
  CostMatrix(std::int64_t rows, std::int64_t cols, std::vector<double> data);

  std::int64_t rows() const { return rows_; }
  std::int64_t cols() const { return cols_; }
  double& at(std::int64_t r, std::int64_t c) { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
  double at(std::int64_t r, std::int64_t c) const {
    return data_[static_cast<std::size_t>(r * cols_ + c)];
  }

 private:
  std::int64_t rows_;
  std::int64_t cols_;
  std::vector<double> data_;
};

struct Assignment {
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;  // (query, gt), sorted by query
  std::vector<std::int64_t> unmatched_queries;

  /// Query assigned to `gt`, or -1.
  std::int64_t query_for_gt(std::int64_t gt) const;
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Minimum-cost assignment of every column to a distinct row. Among optimal
/// assignments the lexicographically smallest (query, gt) pair list is returned.
/// Throws hilo::Error if rows < cols or an entry is not finite.
Assignment hungarian(const CostMatrix& cost);

double assignment_cost(const CostMatrix& cost, const Assignment& assignment);

/// Matching cost of one query against one ground-truth triplet; mirrors the
/// weighted training loss.
double triplet_match_cost(const PredictedTriplet& pred, const RelationTriplet& gt,
                          std::span<const ObjectInstance> objects,
                          const LossWeights& weights = {});

CostMatrix build_cost_matrix(std::span<const PredictedTriplet> preds, const SceneGraph& scene,
                             const LossWeights& weights = {});

struct CorrespondencePair {
  std::int64_t hl_query = 0;
  std::int64_t lh_query = 0;
  std::int64_t gt_index = 0;
  std::int64_t hl_label = 0;
  std::int64_t lh_label = 0;

  friend bool operator==(const CorrespondencePair&, const CorrespondencePair&) = default;
};

struct QueryCorrespondence {
  std::vector<CorrespondencePair> pairs;  // ascending gt_index
  std::vector<std::int64_t> one_sided_gts;  // matched in only one branch (excluded)
};

/// Pairs the H-L and L-H queries that were assigned the same ground-truth
/// triplet. Label vectors are indexed by gt triplet and must agree in length.
QueryCorrespondence build_correspondence(const Assignment& assign_hl, const Assignment& assign_lh,
                                         std::span<const std::int64_t> hl_labels,
                                         std::span<const std::int64_t> lh_labels);

}  // namespace hilo
