// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace hilo {

/// A scalar loss together with its gradient with respect to each
/// differentiable input, in the order the producing function documents.
struct LossReport {
  double value = 0.0;
  std::vector<std::vector<double>> grads;
};

double sigmoid(double x);
/// log(sigmoid(x)), stable for large |x|.
double log_sigmoid(double x);

std::vector<double> softmax(std::span<const double> logits);

/// Backpropagates `upstream` (dL/dp) through p = softmax(logits), given p.
std::vector<double> softmax_backward(std::span<const double> probs,
                                     std::span<const double> upstream);

/// -log softmax(logits)[target]; grads = {softmax - onehot}.
LossReport cross_entropy(std::span<const double> logits, std::int64_t target);

struct FocalParams {
  double gamma = 2.0;
  double alpha = 0.25;
};

/// Sigmoid focal loss averaged over pixels; grads = {dL/dlogits}.
LossReport focal_loss(std::span<const double> logits, std::span<const std::uint8_t> target,
                      FocalParams params = {});

/// 1 - (2 sum(p t) + eps) / (sum(p) + sum(t) + eps), p = sigmoid(logits).
LossReport dice_loss(std::span<const double> logits, std::span<const std::uint8_t> target,
                     double smooth = 1.0);

/// Squared Euclidean distance; grads = {2(a-b), -2(a-b)}.
LossReport mse(std::span<const double> a, std::span<const double> b);

/// Largest per-coordinate relative error between `analytic_grad` and central
/// differences of `f` at `x`. Throws hilo::Error on non-finite evaluations.
double finite_diff_check(const std::function<double(std::span<const double>)>& f,
                         std::span<const double> x, std::span<const double> analytic_grad,
                         double step = 1e-5);

}  // namespace hilo
