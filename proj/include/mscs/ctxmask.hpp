#pragma once

// 5x5 context-availability masks per decoding stage.

#include <cstdint>
#include <string>
#include <vector>

#include "mscs/latgrid.hpp"

namespace mscs {

struct Offset {
  int dy = 0;
  int dx = 0;
  friend bool operator==(const Offset&, const Offset&) = default;
};

/// Set of available offsets within the 5x5 window around the decoded cell.
/// Bit (dy + 2) * 5 + (dx + 2) is set when offset (dy, dx) is available, so
/// ascending bit order is row-major offset order.
class ContextMask {
 public:
  static constexpr int kRadius = 2;
  static constexpr int kSide = 2 * kRadius + 1;
  static constexpr int kCenterBit = kRadius * kSide + kRadius;
  static constexpr std::uint32_t kAllBits = (1u << (kSide * kSide)) - 1u;

  constexpr ContextMask() = default;
  /// Center bit is always cleared.
  static ContextMask from_bits(std::uint32_t bits);
  static ContextMask from_offsets(const std::vector<Offset>& offsets);

  static constexpr int bit_of(int dy, int dx) { return (dy + kRadius) * kSide + (dx + kRadius); }
  static constexpr Offset offset_of(int bit) { return {bit / kSide - kRadius, bit % kSide - kRadius}; }

  [[nodiscard]] bool available(int dy, int dx) const;
  [[nodiscard]] std::uint32_t bits() const { return bits_; }
  [[nodiscard]] int count() const;
  [[nodiscard]] bool empty() const { return bits_ == 0; }
  /// Available offsets in row-major order.
  [[nodiscard]] std::vector<Offset> offsets() const;
  [[nodiscard]] bool subset_of(const ContextMask& other) const { return (bits_ & ~other.bits_) == 0; }

  void set(int dy, int dx, bool value = true);

  friend bool operator==(const ContextMask&, const ContextMask&) = default;

 private:
  std::uint32_t bits_ = 0;
};

struct BorderClippedMask {
  ContextMask base;
  ContextMask clipped;
};

/// Mask for the cells decoded at `stage`: offset (dy, dx) is available iff the
/// wrapped cell ((py + dy) mod n, (px + dx) mod n) has an earlier stage.
/// Multi-cell stages must yield one mask for all their cells.
ContextMask stage_mask(const StageMap& map, int stage);

/// Oracle for stage_mask: materializes the stage grid over `dims` and reads
/// availability off an interior position of `stage`.
ContextMask brute_force_mask(const StageMap& map, int stage, const LatentDims& dims);

/// Drops offsets that fall outside the grid at (y, x).
BorderClippedMask clip_mask(const ContextMask& mask, int y, int x, const LatentDims& dims);

/// Raster-causal half window: dy < 0, or dy == 0 and dx < 0.
ContextMask ar_causal_mask();

/// Available offsets among (-1,0), (1,0), (0,-1), (0,1).
int four_adjacency_count(const ContextMask& mask);

/// Five lines of five characters: '#' available, '.' unavailable, 'o' center.
std::string render_ascii(const ContextMask& mask);

}  // namespace mscs
