#pragma once

// Patch-grid geometry: decoding orders over n x n patches, stage maps,
// latent dimensions and the padding calculator.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mscs {

/// Latent grid size. The channel dimension is collapsed.
struct LatentDims {
  int height = 0;
  int width = 0;

  LatentDims() = default;
  LatentDims(int h, int w);

  [[nodiscard]] std::int64_t positions() const { return std::int64_t{height} * width; }
  friend bool operator==(const LatentDims&, const LatentDims&) = default;
};

/// Bijective decoding order over an n x n patch. `stages()[r * n + c]` is the
/// stage at which within-patch cell (r, c) is decoded.
class PatchOrder {
 public:
  static constexpr int kMaxSide = 4;

  PatchOrder(int n, std::vector<int> stages);

  /// Row-major raster order 0, 1, ..., n^2 - 1.
  static PatchOrder raster(int n);

  [[nodiscard]] int n() const { return n_; }
  [[nodiscard]] int cells() const { return n_ * n_; }
  [[nodiscard]] const std::vector<int>& stages() const { return stages_; }
  [[nodiscard]] int stage_at(int row, int col) const { return stages_[row * n_ + col]; }
  /// Inverse permutation: the cell index decoded at `stage`.
  [[nodiscard]] int cell_of_stage(int stage) const;

  /// True when lcm(16n, 64) > 64, i.e. the patch size forces extra padding.
  [[nodiscard]] bool impractical() const { return impractical_; }

  friend bool operator==(const PatchOrder& a, const PatchOrder& b) {
    return a.n_ == b.n_ && a.stages_ == b.stages_;
  }
  friend bool operator<(const PatchOrder& a, const PatchOrder& b);

 private:
  int n_;
  std::vector<int> stages_;
  bool impractical_;
};

/// Parses n^2 hex digits, row-major, top row first. Accepts upper or lower
/// case; throws InvalidArgument on bad length, bad digit or non-permutation.
PatchOrder parse_order(std::string_view text);

/// Lower-case hex string; inverse of parse_order.
std::string format_order(const PatchOrder& order);

/// Assignment of within-patch cells to stages. Bijective maps come from a
/// PatchOrder; the checkerboard map has two cells per stage.
class StageMap {
 public:
  StageMap(int n, std::vector<int> stage_of);

  static StageMap from_order(const PatchOrder& order);
  /// 2-stage checkerboard. Anchors are the cells with (row + col) % 2 ==
  /// anchor_parity.
  static StageMap checkerboard(int anchor_parity = 0);

  [[nodiscard]] int n() const { return n_; }
  [[nodiscard]] int num_stages() const { return num_stages_; }
  [[nodiscard]] int stage_of(int row, int col) const { return stage_of_[row * n_ + col]; }
  [[nodiscard]] const std::vector<int>& cells() const { return stage_of_; }
  [[nodiscard]] bool bijective() const { return num_stages_ == n_ * n_; }
  /// Cells (row * n + col) decoded at `stage`, ascending.
  [[nodiscard]] std::vector<int> cells_of_stage(int stage) const;

 private:
  int n_;
  std::vector<int> stage_of_;
  int num_stages_;
};

/// Stage of absolute position (y, x); the schedule is n-periodic in both axes.
int stage_of_position(const PatchOrder& order, int y, int x);
int stage_of_position(const StageMap& map, int y, int x);

struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

/// Fraction of within-patch cells assigned to stage 0, reduced.
Fraction anchor_fraction(const StageMap& map);

/// lcm(16n, 64).
std::int64_t required_padding_multiple(int n);

struct PaddedDims {
  std::int64_t height = 0;
  std::int64_t width = 0;
  double overhead = 0.0;  // paddedH * paddedW / (H * W) - 1
};

PaddedDims pad_image_dims(std::int64_t height, std::int64_t width, int n);

// ---------------------------------------------------------------------------
// Context-model modes shared by the codec and the schedule simulator.

enum class ModeKind : std::uint8_t { nocontext = 0, checkerboard = 1, ar = 2, multistage = 3 };

struct Mode {
  ModeKind kind = ModeKind::nocontext;
  std::optional<PatchOrder> order;  // multistage only
  int anchor_parity = 0;            // checkerboard only

  static Mode nocontext() { return {}; }
  static Mode checkerboard(int parity = 0) { return {ModeKind::checkerboard, std::nullopt, parity}; }
  static Mode ar() { return {ModeKind::ar, std::nullopt, 0}; }
  static Mode multistage(PatchOrder o) { return {ModeKind::multistage, std::move(o), 0}; }

  /// Patch side the grid must be divisible by (1 for non-periodic modes).
  [[nodiscard]] int period() const;
  /// "nocontext", "checkerboard", "ar", or "multistage:<order>".
  [[nodiscard]] std::string label() const;
};

std::string_view mode_kind_name(ModeKind kind);
/// Accepts "nocontext", "checkerboard", "ar", "multistage".
ModeKind parse_mode_kind(std::string_view text);

/// Throws InvalidArgument unless the mode can schedule a grid of `dims`.
void require_compatible(const Mode& mode, const LatentDims& dims);

}  // namespace mscs
