// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hilo {

/// Run-length encoded binary mask.
///
/// Runs are row-major and alternate background/foreground, starting with
/// background. The first run may be zero; every later run is positive, so each
/// bit grid has exactly one encoding.
class BinaryMask {
 public:
  BinaryMask() = default;

  /// Validates `runs` against the canonical layout; throws hilo::Error.
  BinaryMask(std::int64_t height, std::int64_t width, std::vector<std::int64_t> runs);

  /// All-background mask.
  static BinaryMask empty(std::int64_t height, std::int64_t width);

  /// Encodes a row-major grid; nonzero entries are foreground.
  static BinaryMask from_bits(std::int64_t height, std::int64_t width,
                              std::span<const std::uint8_t> bits);

  /// Axis-aligned rectangle [top, top+h) x [left, left+w), clipped to the grid.
  static BinaryMask rectangle(std::int64_t height, std::int64_t width, std::int64_t top,
                              std::int64_t left, std::int64_t rect_h, std::int64_t rect_w);

  std::int64_t height() const { return height_; }
  std::int64_t width() const { return width_; }
  std::int64_t pixel_count() const { return height_ * width_; }
  const std::vector<std::int64_t>& runs() const { return runs_; }

  std::vector<std::uint8_t> to_bits() const;
  std::int64_t area() const;
  bool same_shape(const BinaryMask& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::int64_t height_ = 0;
  std::int64_t width_ = 0;
  std::vector<std::int64_t> runs_{0};
};

/// Foreground pixels shared by both masks.
std::int64_t intersection_area(const BinaryMask& a, const BinaryMask& b);

/// |a & b| / |a | b|; 0 when both masks are empty. Throws on shape mismatch.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

/// Pixel-wise OR, canonically re-encoded. Throws on shape mismatch.
BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b);

}  // namespace hilo
