#pragma once

// Stationary Gaussian latent-field model. Scores a context mask by the exact
// conditional variance of the best linear predictor and the entropy of the
// resulting unit-bin discretized Gaussian; also samples synthetic fields.

#include <cstdint>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mscs/ctxmask.hpp"
#include "mscs/grid.hpp"
#include "mscs/latgrid.hpp"
#include "mscs/parallel.hpp"

namespace mscs {

enum class CovKind : std::uint8_t { separable = 0, isotropic = 1 };

std::string_view cov_kind_name(CovKind kind);
CovKind parse_cov_kind(std::string_view text);

/// Quantization noise of a unit-step uniform quantizer, 1/12.
inline constexpr double kDefaultQuantNoise = 1.0 / 12.0;

/// C(dy, dx) = variance * rho^(|dy| + |dx|) (separable) or
/// variance * rho^sqrt(dy^2 + dx^2) (isotropic).
struct FieldModel {
  double variance = 25.0;
  double rho = 0.9;
  CovKind kind = CovKind::separable;

  /// Throws InvalidArgument unless variance > 0 and 0 < rho < 1.
  void validate() const;
  [[nodiscard]] double covariance(int dy, int dx) const;
  [[nodiscard]] double stddev() const;

  friend bool operator==(const FieldModel&, const FieldModel&) = default;
};

/// Where quantization noise enters the conditional model. The neighbours are
/// always observed through the quantizer; `context_and_target` additionally
/// inflates the predicted cell's own variance.
enum class NoisePlacement { context_and_target, context_only };

struct CondStats {
  ContextMask mask;
  std::vector<Offset> offsets;  // row-major, aligned with weights
  std::vector<double> weights;
  double cond_variance = 0.0;
  double rate_bits = 0.0;
};

CondStats cond_stats(const FieldModel& model, const ContextMask& mask, double quant_noise = kDefaultQuantNoise,
                     NoisePlacement placement = NoisePlacement::context_and_target);

/// Entropy in bits of N(0, variance) discretized to bins [k - 1/2, k + 1/2),
/// |k| <= ceil(16 * sqrt(variance)), tails folded into the end bins.
double discretized_gaussian_entropy(double variance);

/// Memoizes cond_stats by mask bits. Not thread-safe.
class CondStatsCache {
 public:
  CondStatsCache(FieldModel model, double quant_noise, NoisePlacement placement);

  const CondStats& get(const ContextMask& mask);
  [[nodiscard]] std::int64_t hits() const { return hits_; }
  [[nodiscard]] std::int64_t misses() const { return misses_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] const FieldModel& model() const { return model_; }

 private:
  FieldModel model_;
  double quant_noise_;
  NoisePlacement placement_;
  std::unordered_map<std::uint32_t, CondStats> entries_;
  std::int64_t hits_ = 0;
  std::int64_t misses_ = 0;
};

/// Counter-based standard normal draw: the same (seed, index) always yields
/// the same value, independent of evaluation order.
double standard_normal(std::uint64_t seed, std::uint64_t index);

/// Exact sample of a separable field: Y = sigma * L_h G L_w^T with L the
/// lower Cholesky factor of the AR(1) correlation matrix. Both execution
/// paths produce bit-identical grids.
Grid<double> sample_field(const FieldModel& model, const LatentDims& dims, std::uint64_t seed,
                          Exec exec = Exec::parallel);

struct OrderScore {
  PatchOrder order;
  std::vector<double> per_stage_bits;
  double total_bits_per_position = 0.0;
};

/// Border-free rate of a bijective order: per-stage rate of the stage mask,
/// total = mean over stages.
OrderScore theoretical_order_rate(const FieldModel& model, const PatchOrder& order,
                                  double quant_noise = kDefaultQuantNoise);

}  // namespace mscs
