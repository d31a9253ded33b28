#pragma once

// Wavefront schedule simulator: stage counts, per-stage widths and an
// affine-per-stage latency model for each context mode.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mscs/latgrid.hpp"

namespace mscs {

struct Schedule {
  Mode mode;
  LatentDims dims;
  std::int64_t num_stages = 0;
  std::vector<std::int64_t> positions_per_stage;

  [[nodiscard]] std::int64_t critical_path() const { return num_stages; }
  [[nodiscard]] std::int64_t total_positions() const;
};

/// lanes: positions processed concurrently; per_stage_overhead: fixed cost of
/// launching a stage; per_position_cost: cost of one position on one lane.
struct LatencyModel {
  double lanes = 1.0;
  double per_stage_overhead = 1.0;
  double per_position_cost = 1.0;

  void validate() const;
};

Schedule build_schedule(const Mode& mode, const LatentDims& dims);

/// Sum over stages of t0 + positions * t1 / P.
double simulate_latency(const Schedule& schedule, const LatencyModel& model);

struct TimingSample {
  Mode mode;
  LatentDims dims;
  double latency = 0.0;
};

struct FitResult {
  LatencyModel model;
  std::vector<double> predicted;
  std::vector<double> residuals;           // predicted - measured
  std::vector<double> relative_residuals;  // (predicted - measured) / measured
};

/// Ordinary least squares for (t0, t1) at fixed lanes. Needs at least two
/// samples with distinct stage counts; throws when the fitted parameters
/// are not positive.
FitResult fit_overhead(std::span<const TimingSample> samples, double lanes);

/// CSV with header `mode,height,width,latency`; mode is ar, checkerboard,
/// nocontext, or NxN for an N x N multistage patch.
std::vector<TimingSample> parse_timing_csv(const std::string& text);

/// Schedule-level mode spec: "ar", "checkerboard", "nocontext", "2x2", "3x3",
/// "4x4" (the multistage order does not affect the schedule; raster is used).
Mode parse_schedule_mode(const std::string& text);

}  // namespace mscs
