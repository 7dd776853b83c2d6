// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#include "hilo/mask.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "hilo/error.hpp"

namespace hilo {
namespace {

using Interval = std::pair<std::int64_t, std::int64_t>;  // [begin, end)

std::vector<Interval> foreground_intervals(const BinaryMask& m) {
  std::vector<Interval> out;
  std::int64_t pos = 0;
  const auto& runs = m.runs();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (i % 2 == 1) out.emplace_back(pos, pos + runs[i]);
    pos += runs[i];
  }
  return out;
}

BinaryMask from_intervals(std::int64_t height, std::int64_t width,
                          const std::vector<Interval>& intervals) {
  // Intervals must be sorted and non-overlapping; touching ones are merged.
  std::vector<std::int64_t> runs;
  std::int64_t pos = 0;
  std::int64_t pending_begin = -1, pending_end = -1;
  auto flush = [&]() {
    if (pending_begin < 0) return;
    runs.push_back(pending_begin - pos);
    runs.push_back(pending_end - pending_begin);
    pos = pending_end;
  };
  for (const auto& [b, e] : intervals) {
    if (e <= b) continue;
    if (pending_begin >= 0 && b <= pending_end) {
      pending_end = std::max(pending_end, e);
      continue;
    }
    flush();
    pending_begin = b;
    pending_end = e;
  }
  flush();
  const std::int64_t total = height * width;
  if (total - pos > 0 || runs.empty()) runs.push_back(total - pos);
  return BinaryMask(height, width, std::move(runs));
}

void require_same_shape(const BinaryMask& a, const BinaryMask& b, const char* op) {
  if (!a.same_shape(b)) {
    throw Error(std::string(op) + ": mask dimension mismatch (" + std::to_string(a.height()) +
                "x" + std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                std::to_string(b.width()) + ")");
  }
}

}  // namespace

BinaryMask::BinaryMask(std::int64_t height, std::int64_t width, std::vector<std::int64_t> runs)
    : height_(height), width_(width), runs_(std::move(runs)) {
  if (height_ < 0 || width_ < 0) throw Error("mask dimensions must be nonnegative");
  if (runs_.empty()) throw Error("mask runs must not be empty");
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    if (runs_[i] < 0 || (i > 0 && runs_[i] == 0)) {
      throw Error("mask run " + std::to_string(i) + " must be " +
                  (i == 0 ? "nonnegative" : "positive"));
    }
    sum += runs_[i];
  }
  if (sum != height_ * width_) {
    throw Error("mask runs sum to " + std::to_string(sum) + ", expected " +
                std::to_string(height_ * width_));
  }
}

BinaryMask BinaryMask::empty(std::int64_t height, std::int64_t width) {
  return BinaryMask(height, width, {height * width});
}

BinaryMask BinaryMask::from_bits(std::int64_t height, std::int64_t width,
                                 std::span<const std::uint8_t> bits) {
  if (static_cast<std::int64_t>(bits.size()) != height * width) {
    throw Error("bit grid size does not match mask dimensions");
  }
  std::vector<std::int64_t> runs;
  bool current = false;
  std::int64_t run = 0;
  for (auto bit : bits) {
    if ((bit != 0) != current) {
      runs.push_back(run);
      run = 0;
      current = !current;
    }
    ++run;
  }
  if (run > 0 || runs.empty()) runs.push_back(run);
  return BinaryMask(height, width, std::move(runs));
}

BinaryMask BinaryMask::rectangle(std::int64_t height, std::int64_t width, std::int64_t top,
                                 std::int64_t left, std::int64_t rect_h, std::int64_t rect_w) {
  const auto r0 = std::clamp<std::int64_t>(top, 0, height);
  const auto r1 = std::clamp<std::int64_t>(top + rect_h, 0, height);
  const auto c0 = std::clamp<std::int64_t>(left, 0, width);
  const auto c1 = std::clamp<std::int64_t>(left + rect_w, 0, width);
  std::vector<Interval> intervals;
  for (auto r = r0; r < r1; ++r) intervals.emplace_back(r * width + c0, r * width + c1);
  return from_intervals(height, width, intervals);
}

std::vector<std::uint8_t> BinaryMask::to_bits() const {
  std::vector<std::uint8_t> bits;
  bits.reserve(static_cast<std::size_t>(pixel_count()));
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    bits.insert(bits.end(), static_cast<std::size_t>(runs_[i]), i % 2 == 1 ? 1 : 0);
  }
  return bits;
}

std::int64_t BinaryMask::area() const {
  std::int64_t a = 0;
  for (std::size_t i = 1; i < runs_.size(); i += 2) a += runs_[i];
  return a;
}

std::int64_t intersection_area(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "intersection");
  const auto ia = foreground_intervals(a);
  const auto ib = foreground_intervals(b);
  std::int64_t total = 0;
  std::size_t i = 0, j = 0;
  while (i < ia.size() && j < ib.size()) {
    const auto lo = std::max(ia[i].first, ib[j].first);
    const auto hi = std::min(ia[i].second, ib[j].second);
    if (hi > lo) total += hi - lo;
    if (ia[i].second < ib[j].second) {
      ++i;
    } else {
      ++j;
    }
  }
  return total;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "mask_iou");
  const auto inter = intersection_area(a, b);
  const auto uni = a.area() + b.area() - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "mask_union");
  auto ia = foreground_intervals(a);
  const auto ib = foreground_intervals(b);
  ia.insert(ia.end(), ib.begin(), ib.end());
  std::sort(ia.begin(), ia.end());
  return from_intervals(a.height(), a.width(), ia);
}

}  // namespace hilo
