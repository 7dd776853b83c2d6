// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#include "hilo/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hilo/error.hpp"

namespace hilo {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  if (x >= 0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw Error("softmax: empty input");
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

std::vector<double> softmax_backward(std::span<const double> probs,
                                     std::span<const double> upstream) {
  double dot = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) dot += probs[i] * upstream[i];
  std::vector<double> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] * (upstream[i] - dot);
  return out;
}

LossReport cross_entropy(std::span<const double> logits, std::int64_t target) {
  if (target < 0 || target >= static_cast<std::int64_t>(logits.size())) {
    throw Error("cross_entropy: target " + std::to_string(target) + " out of range for " +
                std::to_string(logits.size()) + " classes");
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - mx);
  const double log_z = mx + std::log(sum);
  std::vector<double> grad(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) grad[i] = std::exp(logits[i] - log_z);
  grad[static_cast<std::size_t>(target)] -= 1.0;
  return {log_z - logits[static_cast<std::size_t>(target)], {std::move(grad)}};
}

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw Error(std::string(op) + ": shape mismatch (" + std::to_string(a) + " vs " +
                std::to_string(b) + ")");
  }
}

}  // namespace

LossReport focal_loss(std::span<const double> logits, std::span<const std::uint8_t> target,
                      FocalParams params) {
  require_same_size(logits.size(), target.size(), "focal_loss");
  const auto n = logits.size();
  std::vector<double> grad(n, 0.0);
  if (n == 0) return {0.0, {std::move(grad)}};
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool fg = target[i] != 0;
    // p_t is sigmoid(+x) for foreground and sigmoid(-x) for background.
    const double signed_x = fg ? logits[i] : -logits[i];
    const double p_t = sigmoid(signed_x);
    const double log_p_t = log_sigmoid(signed_x);
    const double q = sigmoid(-signed_x);  // 1 - p_t without cancellation
    const double alpha_t = fg ? params.alpha : 1.0 - params.alpha;
    const double q_pow = std::pow(q, params.gamma);
    total += alpha_t * q_pow * (-log_p_t);
    // d/dx_signed of alpha_t q^g (-log p_t) = alpha_t (g q^g p_t log p_t - q^(g+1)).
    const double d_signed = alpha_t * (params.gamma * q_pow * p_t * log_p_t - q_pow * q);
    grad[i] = (fg ? d_signed : -d_signed) / static_cast<double>(n);
  }
  return {total / static_cast<double>(n), {std::move(grad)}};
}

LossReport dice_loss(std::span<const double> logits, std::span<const std::uint8_t> target,
                     double smooth) {
  require_same_size(logits.size(), target.size(), "dice_loss");
  if (!(smooth > 0.0)) throw Error("dice_loss: smoothing must be positive");
  const auto n = logits.size();
  std::vector<double> p(n);
  double inter = 0.0, sum_p = 0.0, sum_t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = sigmoid(logits[i]);
    const double t = target[i] != 0 ? 1.0 : 0.0;
    inter += p[i] * t;
    sum_p += p[i];
    sum_t += t;
  }
  const double num = 2.0 * inter + smooth;
  const double den = sum_p + sum_t + smooth;
  std::vector<double> grad(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = target[i] != 0 ? 1.0 : 0.0;
    const double d_p = -(2.0 * t * den - num) / (den * den);
    grad[i] = d_p * p[i] * (1.0 - p[i]);
  }
  return {1.0 - num / den, {std::move(grad)}};
}

LossReport mse(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "mse");
  double total = 0.0;
  std::vector<double> ga(a.size()), gb(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    total += d * d;
    ga[i] = 2.0 * d;
    gb[i] = -2.0 * d;
  }
  return {total, {std::move(ga), std::move(gb)}};
}

double finite_diff_check(const std::function<double(std::span<const double>)>& f,
                         std::span<const double> x, std::span<const double> analytic_grad,
                         double step) {
  if (!(step > 0.0)) throw Error("finite_diff_check: step must be positive");
  require_same_size(x.size(), analytic_grad.size(), "finite_diff_check");
  std::vector<double> probe(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + step;
    const double fp = f(probe);
    probe[i] = orig - step;
    const double fm = f(probe);
    probe[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw Error("finite_diff_check: non-finite evaluation at coordinate " + std::to_string(i));
    }
    const double numeric = (fp - fm) / (2.0 * step);
    const double denom =
        std::max({std::abs(analytic_grad[i]), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic_grad[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace hilo
