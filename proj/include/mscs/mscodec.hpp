#pragma once

// Multistage entropy codec over quantized synthetic latent grids.
//
// Positions are coded stage by stage, raster order within a stage. Each
// position is predicted from already-coded neighbours inside its clipped
// context mask by the best linear predictor of the field model; the symbol
// is range coded against the discretized N(mu, v) built around that
// prediction. Prediction within a stage is data-parallel; the range coder is
// strictly sequential.
//
// Bitstream layout (all integers big-endian, reals IEEE-754 binary64):
//
//   offset  size   field
//   0       4      magic "MSCS"
//   4       1      version (1)
//   5       1      mode: 0 nocontext, 1 checkerboard, 2 ar, 3 multistage
//   6       1      n: patch side for multistage, else 0
//   7       n*n    order digits, ASCII lower-case hex (multistage only)
//   ..      4      height
//   ..      4      width
//   ..      8      sigma^2
//   ..      8      rho
//   ..      1      covariance kind: 0 separable, 1 isotropic
//   ..      1      checkerboard anchor parity
//   ..      8      quantization noise
//   ..      4      model id (FNV-1a of kind, sigma^2, rho, noise bytes)
//   ..      4      payload length in bytes
//   ..      ...    range-coded payload

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mscs/ctxmask.hpp"
#include "mscs/gaussfield.hpp"
#include "mscs/grid.hpp"
#include "mscs/latgrid.hpp"
#include "mscs/parallel.hpp"
#include "mscs/range_coder.hpp"

namespace mscs {

using QuantGrid = Grid<std::int32_t>;

/// Symbols are clamped to [-limit, limit], limit = ceil(16 * sigma) + 1.
std::int32_t clamp_limit(const FieldModel& model);

/// Round-to-nearest, then clamp.
QuantGrid quantize(const Grid<double>& field, const FieldModel& model);

/// Stage-ordered positions. Stage s covers positions()[begin(s), begin(s+1)),
/// raster order within the stage; every position of stage s uses base mask
/// mask(s) before border clipping.
class CodingSchedule {
 public:
  CodingSchedule(const Mode& mode, const LatentDims& dims);

  [[nodiscard]] int num_stages() const { return static_cast<int>(stage_begin_.size()) - 1; }
  [[nodiscard]] std::span<const std::int32_t> stage(int s) const;
  [[nodiscard]] const ContextMask& mask(int s) const { return masks_[s]; }
  /// Stage groups used for reporting: the stages themselves, except AR,
  /// which reports all positions as one group.
  [[nodiscard]] int report_group(int s) const { return serial_ ? 0 : s; }
  [[nodiscard]] int num_report_groups() const { return serial_ ? 1 : num_stages(); }

 private:
  std::vector<std::int32_t> positions_;
  std::vector<std::int32_t> stage_begin_;
  std::vector<ContextMask> masks_;
  bool serial_ = false;
};

struct CodecOptions {
  double quant_noise = kDefaultQuantNoise;
  Exec exec = Exec::parallel;
};

struct Bitstream {
  static constexpr std::uint8_t kVersion = 1;

  Mode mode;
  LatentDims dims;
  FieldModel model;
  double quant_noise = kDefaultQuantNoise;
  std::vector<std::uint8_t> payload;

  [[nodiscard]] std::vector<std::uint8_t> serialize() const;
  /// Throws CorruptStream on a malformed header or short payload.
  static Bitstream parse(std::span<const std::uint8_t> bytes);

  [[nodiscard]] std::size_t header_bytes() const;
  /// Bits of the serialized stream, header included.
  [[nodiscard]] std::int64_t bit_count() const;
};

std::uint32_t model_id(const FieldModel& model, double quant_noise);

/// Ideal code lengths (-log2 of the coded probability) gathered while coding.
struct CodingStats {
  std::vector<double> group_bits;  // per report group
  double theoretical_bits = 0.0;   // sum over positions of the model rate
  std::size_t distinct_masks = 0;
};

Bitstream encode(const QuantGrid& grid, const Mode& mode, const FieldModel& model, const CodecOptions& options = {},
                 CodingStats* stats = nullptr);

/// Throws CorruptStream on truncation or when `model` differs from the header.
QuantGrid decode(const Bitstream& bs, const FieldModel& model, const CodecOptions& options = {});

/// Discretized-Gaussian frequency table over [-limit, limit] centred on mu.
/// Exposed for tests.
FrequencyTable symbol_table(double mu, double variance, std::int32_t limit);

struct RateReport {
  std::string mode;   // nocontext | checkerboard | ar | multistage
  std::string order;  // multistage order, else empty
  LatentDims dims;
  int seeds = 0;
  double total_bits = 0.0;    // mean serialized size, header included
  double payload_bits = 0.0;  // mean range-coded payload size
  double bits_per_position = 0.0;
  double bits_per_position_sd = 0.0;
  double theoretical_bits_per_position = 0.0;
  std::vector<double> per_stage_bits;  // mean ideal code length per report group
  std::string round_trip = "skipped";  // ok | fail | skipped
  std::vector<double> per_seed_bits_per_position;
};

struct MeasureOptions {
  CodecOptions codec;
  bool verify = false;
};

/// Encodes one sampled field per seed under every mode. Fields are shared
/// across modes, so per-seed rates are paired.
std::vector<RateReport> measure_rates(const LatentDims& dims, const FieldModel& model, std::span<const Mode> modes,
                                      std::span<const std::uint64_t> seeds, const MeasureOptions& options = {});

}  // namespace mscs
