#include "mscs/gaussfield.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <string>

#include "mscs/error.hpp"

namespace mscs {

namespace {

// Upper-tail probability of a standard normal.
double upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

std::uint64_t splitmix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

}  // namespace

std::string_view cov_kind_name(CovKind kind) {
  return kind == CovKind::separable ? "separable" : "isotropic";
}

CovKind parse_cov_kind(std::string_view text) {
  if (text == "separable") return CovKind::separable;
  if (text == "isotropic") return CovKind::isotropic;
  throw InvalidArgument("unknown covariance kind '" + std::string(text) + "'");
}

void FieldModel::validate() const {
  if (!(variance > 0.0) || !std::isfinite(variance)) throw InvalidArgument("variance must be > 0");
  if (!(rho > 0.0 && rho < 1.0)) throw InvalidArgument("rho must lie in (0, 1)");
}

double FieldModel::covariance(int dy, int dx) const {
  const int ay = std::abs(dy);
  const int ax = std::abs(dx);
  if (kind == CovKind::separable) return variance * std::pow(rho, ay + ax);
  return variance * std::pow(rho, std::sqrt(static_cast<double>(ay * ay + ax * ax)));
}

double FieldModel::stddev() const { return std::sqrt(variance); }

double discretized_gaussian_entropy(double variance) {
  if (!(variance > 0.0)) throw InvalidArgument("entropy needs a positive variance");
  const double s = std::sqrt(variance);
  const int t = static_cast<int>(std::ceil(16.0 * s));
  auto term = [](double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; };

  double h = term(1.0 - 2.0 * upper_tail(0.5 / s));  // k = 0
  for (int k = 1; k < t; ++k) {
    const double p = upper_tail((k - 0.5) / s) - upper_tail((k + 0.5) / s);
    h += 2.0 * term(p);
  }
  if (t >= 1) h += 2.0 * term(upper_tail((t - 0.5) / s));  // folded end bins
  return h;
}

CondStats cond_stats(const FieldModel& model, const ContextMask& mask, double quant_noise,
                     NoisePlacement placement) {
  if (quant_noise < 0.0) throw InvalidArgument("quantNoise must be >= 0");
  CondStats out;
  out.mask = mask;
  out.offsets = mask.offsets();
  const double target_noise = placement == NoisePlacement::context_and_target ? quant_noise : 0.0;
  const double c00 = model.covariance(0, 0) + target_noise;
  const auto k = static_cast<Eigen::Index>(out.offsets.size());

  if (k == 0) {
    out.cond_variance = c00;
    out.rate_bits = discretized_gaussian_entropy(c00);
    return out;
  }

  Eigen::MatrixXd sigma(k, k);
  Eigen::VectorXd c(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Offset& oi = out.offsets[i];
    c(i) = model.covariance(oi.dy, oi.dx);
    for (Eigen::Index j = 0; j < k; ++j) {
      const Offset& oj = out.offsets[j];
      sigma(i, j) = model.covariance(oi.dy - oj.dy, oi.dx - oj.dx);
    }
    sigma(i, i) += quant_noise;
  }

  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    sigma.diagonal().array() += 1e-10 * model.variance;
    llt.compute(sigma);
    if (llt.info() != Eigen::Success) throw NumericalError("covariance not positive definite after jitter");
  }
  const Eigen::VectorXd w = llt.solve(c);
  out.weights.assign(w.data(), w.data() + k);
  out.cond_variance = c00 - c.dot(w);
  if (!(out.cond_variance > 0.0)) {
    throw NumericalError("non-positive conditional variance " + std::to_string(out.cond_variance));
  }
  out.rate_bits = discretized_gaussian_entropy(out.cond_variance);
  return out;
}

CondStatsCache::CondStatsCache(FieldModel model, double quant_noise, NoisePlacement placement)
    : model_(model), quant_noise_(quant_noise), placement_(placement) {
  model_.validate();
}

const CondStats& CondStatsCache::get(const ContextMask& mask) {
  if (auto it = entries_.find(mask.bits()); it != entries_.end()) {
    ++hits_;
    return it->second;
  }
  ++misses_;
  return entries_.emplace(mask.bits(), cond_stats(model_, mask, quant_noise_, placement_)).first->second;
}

double standard_normal(std::uint64_t seed, std::uint64_t index) {
  // Outputs 2i+1 and 2i+2 of a SplitMix64 stream keyed by the seed.
  const std::uint64_t key = splitmix64(seed);
  const std::uint64_t a = splitmix64(key + (2 * index + 1) * kGamma);
  const std::uint64_t b = splitmix64(key + (2 * index + 2) * kGamma);
  const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;          // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Grid<double> sample_field(const FieldModel& model, const LatentDims& dims, std::uint64_t seed, Exec exec) {
  model.validate();
  if (model.kind != CovKind::separable) throw InvalidArgument("only the separable field can be sampled exactly");
  if (dims.height > 4096 || dims.width > 4096) throw InvalidArgument("sample_field supports at most 4096x4096");

  const int h = dims.height;
  const int w = dims.width;
  const double rho = model.rho;
  const double innov = std::sqrt(1.0 - rho * rho);
  const double sigma = model.stddev();
  const bool par = exec == Exec::parallel;
  Grid<double> y(dims);

#pragma omp parallel for schedule(static) if (par)
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) y(r, c) = standard_normal(seed, static_cast<std::uint64_t>(r) * w + c);
  }

  // L_h G: AR(1) recursion down each column.
#pragma omp parallel for schedule(static) if (par)
  for (int c = 0; c < w; ++c) {
    for (int r = 1; r < h; ++r) y(r, c) = rho * y(r - 1, c) + innov * y(r, c);
  }

  // (L_h G) L_w^T: the same recursion along each row, then scale.
#pragma omp parallel for schedule(static) if (par)
  for (int r = 0; r < h; ++r) {
    for (int c = 1; c < w; ++c) y(r, c) = rho * y(r, c - 1) + innov * y(r, c);
    for (int c = 0; c < w; ++c) y(r, c) *= sigma;
  }
  return y;
}

OrderScore theoretical_order_rate(const FieldModel& model, const PatchOrder& order, double quant_noise) {
  model.validate();
  const StageMap map = StageMap::from_order(order);
  CondStatsCache cache(model, quant_noise, NoisePlacement::context_and_target);
  OrderScore out{order, {}, 0.0};
  out.per_stage_bits.reserve(order.cells());
  double sum = 0.0;
  for (int s = 0; s < order.cells(); ++s) {
    const double bits = cache.get(stage_mask(map, s)).rate_bits;
    out.per_stage_bits.push_back(bits);
    sum += bits;
  }
  out.total_bits_per_position = sum / order.cells();
  return out;
}

}  // namespace mscs
