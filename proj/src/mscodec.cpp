#include "mscs/mscodec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "mscs/error.hpp"

namespace mscs {

namespace {

constexpr std::uint8_t kMagic[4] = {'M', 'S', 'C', 'S'};

// Minimum stage size worth a parallel region.
constexpr std::int64_t kParallelStageMin = 64;

double upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

// P(a <= X < b) for X ~ N(0, 1), a < b, accurate in both tails.
double interval_mass(double a, double b) {
  if (a >= 0.0) return upper_tail(a) - upper_tail(b);
  if (b <= 0.0) return upper_tail(-b) - upper_tail(-a);
  return 1.0 - upper_tail(-a) - upper_tail(b);
}

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int s = 56; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(bits >> s));
  }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t>& data() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (std::uint8_t b : take(4)) v = (v << 8) | b;
    return v;
  }
  double f64() {
    std::uint64_t v = 0;
    for (std::uint8_t b : take(8)) v = (v << 8) | b;
    return std::bit_cast<double>(v);
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    if (pos_ + n > in_.size()) throw CorruptStream("bitstream truncated");
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  [[nodiscard]] std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

// Clipped masks, cached predictors and the shared per-stage prediction step.
class StagePredictor {
 public:
  StagePredictor(const CodingSchedule& schedule, const LatentDims& dims, const FieldModel& model,
                 const CodecOptions& options)
      : dims_(dims),
        cache_(model, options.quant_noise, NoisePlacement::context_only),
        par_(options.exec == Exec::parallel),
        stats_(static_cast<std::size_t>(dims.positions()), nullptr),
        mu_(static_cast<std::size_t>(dims.positions()), 0.0) {
    std::vector<std::uint32_t> clipped(stats_.size());
    for (int s = 0; s < schedule.num_stages(); ++s) {
      const auto positions = schedule.stage(s);
      const auto count = static_cast<std::int64_t>(positions.size());
      const ContextMask& base = schedule.mask(s);
#pragma omp parallel for schedule(static) if (par_ && count >= kParallelStageMin)
      for (std::int64_t i = 0; i < count; ++i) {
        const std::int32_t p = positions[i];
        clipped[p] = clip_mask(base, p / dims.width, p % dims.width, dims).clipped.bits();
      }
    }
    for (std::size_t p = 0; p < clipped.size(); ++p) stats_[p] = &cache_.get(ContextMask::from_bits(clipped[p]));
  }

  // Fills mu for every position of the stage from the current grid values.
  void predict(std::span<const std::int32_t> positions, const QuantGrid& values) {
    const auto count = static_cast<std::int64_t>(positions.size());
#pragma omp parallel for schedule(static) if (par_ && count >= kParallelStageMin)
    for (std::int64_t i = 0; i < count; ++i) {
      const std::int32_t p = positions[i];
      const int y = p / dims_.width;
      const int x = p % dims_.width;
      const CondStats& st = *stats_[p];
      double mu = 0.0;
      for (std::size_t j = 0; j < st.offsets.size(); ++j) {
        mu += st.weights[j] * values(y + st.offsets[j].dy, x + st.offsets[j].dx);
      }
      mu_[p] = mu;
    }
  }

  [[nodiscard]] double mu(std::int32_t p) const { return mu_[p]; }
  [[nodiscard]] const CondStats& stats(std::int32_t p) const { return *stats_[p]; }
  [[nodiscard]] std::size_t distinct_masks() const { return cache_.size(); }

 private:
  LatentDims dims_;
  CondStatsCache cache_;
  bool par_;
  std::vector<const CondStats*> stats_;
  std::vector<double> mu_;
};

void check_codec_dims(const Mode& mode, const LatentDims& dims) {
  require_compatible(mode, dims);
  if (dims.height < 8 || dims.width < 8) throw InvalidArgument("codec requires at least an 8x8 grid");
}

}  // namespace

std::int32_t clamp_limit(const FieldModel& model) {
  return static_cast<std::int32_t>(std::ceil(16.0 * model.stddev())) + 1;
}

QuantGrid quantize(const Grid<double>& field, const FieldModel& model) {
  const std::int32_t limit = clamp_limit(model);
  QuantGrid q(field.dims());
  auto in = field.values();
  auto out = q.values();
  for (std::size_t i = 0; i < in.size(); ++i) {
    const auto r = static_cast<std::int32_t>(std::lround(in[i]));
    out[i] = std::clamp(r, -limit, limit);
  }
  return q;
}

CodingSchedule::CodingSchedule(const Mode& mode, const LatentDims& dims) {
  require_compatible(mode, dims);
  const auto total = static_cast<std::int32_t>(dims.positions());
  if (mode.kind == ModeKind::ar || mode.kind == ModeKind::nocontext) {
    positions_.resize(total);
    for (std::int32_t p = 0; p < total; ++p) positions_[p] = p;
    if (mode.kind == ModeKind::nocontext) {
      stage_begin_ = {0, total};
      masks_ = {ContextMask{}};
    } else {
      serial_ = true;
      stage_begin_.resize(total + 1);
      for (std::int32_t p = 0; p <= total; ++p) stage_begin_[p] = p;
      masks_.assign(total, ar_causal_mask());
    }
    return;
  }
  const StageMap map =
      mode.kind == ModeKind::checkerboard ? StageMap::checkerboard(mode.anchor_parity) : StageMap::from_order(*mode.order);
  stage_begin_.push_back(0);
  for (int s = 0; s < map.num_stages(); ++s) {
    for (int y = 0; y < dims.height; ++y) {
      for (int x = 0; x < dims.width; ++x) {
        if (stage_of_position(map, y, x) == s) positions_.push_back(y * dims.width + x);
      }
    }
    stage_begin_.push_back(static_cast<std::int32_t>(positions_.size()));
    masks_.push_back(stage_mask(map, s));
  }
}

std::span<const std::int32_t> CodingSchedule::stage(int s) const {
  return std::span<const std::int32_t>(positions_).subspan(stage_begin_[s], stage_begin_[s + 1] - stage_begin_[s]);
}

FrequencyTable symbol_table(double mu, double variance, std::int32_t limit) {
  const double s = std::sqrt(variance);
  const int nbins = 2 * limit + 1;
  std::vector<double> p(nbins, 0.0);
  // Bins further than 16 sigma from mu carry < 1e-56 and are left at zero.
  const double reach = std::ceil(16.0 * s) + 1.0;
  const auto lo = static_cast<std::int32_t>(std::max<double>(-limit, std::floor(mu - reach)));
  const auto hi = static_cast<std::int32_t>(std::min<double>(limit, std::ceil(mu + reach)));
  for (std::int32_t k = std::max(lo, -limit + 1); k <= std::min(hi, limit - 1); ++k) {
    p[k + limit] = interval_mass((k - 0.5 - mu) / s, (k + 0.5 - mu) / s);
  }
  // End bins absorb the tails.
  p[0] = upper_tail((mu - (-limit + 0.5)) / s);
  p[nbins - 1] = upper_tail((limit - 0.5 - mu) / s);

  const std::uint32_t budget = kFreqTotal - static_cast<std::uint32_t>(nbins);
  std::vector<std::uint32_t> freq(nbins);
  std::uint32_t used = 0;
  int mode_bin = 0;
  for (int i = 0; i < nbins; ++i) {
    freq[i] = 1u + static_cast<std::uint32_t>(std::floor(p[i] * budget));
    used += freq[i];
    if (p[i] > p[mode_bin]) mode_bin = i;
  }
  freq[mode_bin] += kFreqTotal - used;
  return FrequencyTable::from_frequencies(freq);
}

namespace {

// Consecutive positions often share (mu, v) exactly, e.g. every anchor.
class TableMemo {
 public:
  explicit TableMemo(std::int32_t limit) : limit_(limit) {}
  const FrequencyTable& get(double mu, double variance) {
    if (!(mu == mu_ && variance == variance_)) {
      table_ = symbol_table(mu, variance, limit_);
      mu_ = mu;
      variance_ = variance;
    }
    return table_;
  }

 private:
  std::int32_t limit_;
  double mu_ = std::numeric_limits<double>::quiet_NaN();
  double variance_ = std::numeric_limits<double>::quiet_NaN();
  FrequencyTable table_;
};

}  // namespace

std::uint32_t model_id(const FieldModel& model, double quant_noise) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(model.kind));
  w.f64(model.variance);
  w.f64(model.rho);
  w.f64(quant_noise);
  std::uint32_t h = 2166136261u;
  for (std::uint8_t b : w.data()) {
    h ^= b;
    h *= 16777619u;
  }
  return h;
}

std::size_t Bitstream::header_bytes() const {
  const std::size_t digits = mode.kind == ModeKind::multistage ? mode.order->cells() : 0;
  return 4 + 1 + 1 + 1 + digits + 4 + 4 + 8 + 8 + 1 + 1 + 8 + 4 + 4;
}

std::int64_t Bitstream::bit_count() const {
  return static_cast<std::int64_t>(header_bytes() + payload.size()) * 8;
}

std::vector<std::uint8_t> Bitstream::serialize() const {
  ByteWriter w;
  w.bytes(kMagic);
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>(mode.kind));
  if (mode.kind == ModeKind::multistage) {
    w.u8(static_cast<std::uint8_t>(mode.order->n()));
    for (char ch : format_order(*mode.order)) w.u8(static_cast<std::uint8_t>(ch));
  } else {
    w.u8(0);
  }
  w.u32(static_cast<std::uint32_t>(dims.height));
  w.u32(static_cast<std::uint32_t>(dims.width));
  w.f64(model.variance);
  w.f64(model.rho);
  w.u8(static_cast<std::uint8_t>(model.kind));
  w.u8(static_cast<std::uint8_t>(mode.anchor_parity));
  w.f64(quant_noise);
  w.u32(model_id(model, quant_noise));
  w.u32(static_cast<std::uint32_t>(payload.size()));
  w.bytes(payload);
  return std::move(w.data());
}

Bitstream Bitstream::parse(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.take(4);
  if (!std::equal(magic.begin(), magic.end(), kMagic)) throw CorruptStream("bad magic");
  if (const std::uint8_t v = r.u8(); v != kVersion) {
    throw CorruptStream("unsupported bitstream version " + std::to_string(v));
  }
  Bitstream bs;
  const std::uint8_t mode_byte = r.u8();
  if (mode_byte > static_cast<std::uint8_t>(ModeKind::multistage)) throw CorruptStream("unknown mode byte");
  bs.mode.kind = static_cast<ModeKind>(mode_byte);
  const std::uint8_t n = r.u8();
  try {
    if (bs.mode.kind == ModeKind::multistage) {
      const auto digits = r.take(static_cast<std::size_t>(n) * n);
      bs.mode.order = parse_order(std::string(digits.begin(), digits.end()));
    } else if (n != 0) {
      throw CorruptStream("patch side set for a non-multistage mode");
    }
    const auto h = r.u32();
    const auto w = r.u32();
    if (h == 0 || w == 0 || h > 1u << 20 || w > 1u << 20) throw CorruptStream("implausible grid dims");
    bs.dims = LatentDims(static_cast<int>(h), static_cast<int>(w));
  } catch (const InvalidArgument& e) {
    throw CorruptStream(std::string("bad header: ") + e.what());
  }
  bs.model.variance = r.f64();
  bs.model.rho = r.f64();
  const std::uint8_t kind = r.u8();
  if (kind > 1) throw CorruptStream("unknown covariance kind");
  bs.model.kind = static_cast<CovKind>(kind);
  bs.mode.anchor_parity = r.u8();
  if (bs.mode.anchor_parity > 1) throw CorruptStream("bad checkerboard parity");
  bs.quant_noise = r.f64();
  if (r.u32() != model_id(bs.model, bs.quant_noise)) throw CorruptStream("model id does not match header fields");
  const std::uint32_t len = r.u32();
  if (r.remaining() < len) throw CorruptStream("truncated payload");
  const auto payload = r.take(len);
  bs.payload.assign(payload.begin(), payload.end());
  return bs;
}

Bitstream encode(const QuantGrid& grid, const Mode& mode, const FieldModel& model, const CodecOptions& options,
                 CodingStats* stats) {
  model.validate();
  const LatentDims& dims = grid.dims();
  check_codec_dims(mode, dims);
  const std::int32_t limit = clamp_limit(model);
  for (std::int32_t v : grid.values()) {
    if (v < -limit || v > limit) throw InvalidArgument("symbol outside the clamp range; quantize() first");
  }

  const CodingSchedule schedule(mode, dims);
  StagePredictor predictor(schedule, dims, model, options);
  RangeEncoder enc;
  TableMemo tables(limit);
  std::vector<double> group_bits(schedule.num_report_groups(), 0.0);
  double theory = 0.0;

  for (int s = 0; s < schedule.num_stages(); ++s) {
    const auto positions = schedule.stage(s);
    predictor.predict(positions, grid);
    double& bits = group_bits[schedule.report_group(s)];
    for (std::int32_t p : positions) {
      const CondStats& st = predictor.stats(p);
      const FrequencyTable& table = tables.get(predictor.mu(p), st.cond_variance);
      const auto sym = static_cast<std::size_t>(grid.values()[p] + limit);
      enc.encode(table, sym);
      bits -= std::log2(static_cast<double>(table.freq(sym)) / kFreqTotal);
      theory += st.rate_bits;
    }
  }

  Bitstream bs;
  bs.mode = mode;
  bs.dims = dims;
  bs.model = model;
  bs.quant_noise = options.quant_noise;
  bs.payload = enc.finish();
  if (stats != nullptr) {
    stats->group_bits = std::move(group_bits);
    stats->theoretical_bits = theory;
    stats->distinct_masks = predictor.distinct_masks();
  }
  return bs;
}

QuantGrid decode(const Bitstream& bs, const FieldModel& model, const CodecOptions& options) {
  if (!(bs.model == model) || model_id(bs.model, bs.quant_noise) != model_id(model, options.quant_noise)) {
    throw CorruptStream("bitstream header does not match the decoder's field model");
  }
  check_codec_dims(bs.mode, bs.dims);
  const std::int32_t limit = clamp_limit(model);
  const CodingSchedule schedule(bs.mode, bs.dims);
  CodecOptions opts = options;
  opts.quant_noise = bs.quant_noise;
  StagePredictor predictor(schedule, bs.dims, model, opts);
  RangeDecoder dec(bs.payload);
  TableMemo tables(limit);
  QuantGrid out(bs.dims, 0);

  for (int s = 0; s < schedule.num_stages(); ++s) {
    const auto positions = schedule.stage(s);
    predictor.predict(positions, out);
    for (std::int32_t p : positions) {
      const FrequencyTable& table = tables.get(predictor.mu(p), predictor.stats(p).cond_variance);
      out.values()[p] = static_cast<std::int32_t>(dec.decode(table)) - limit;
    }
  }
  return out;
}

std::vector<RateReport> measure_rates(const LatentDims& dims, const FieldModel& model, std::span<const Mode> modes,
                                      std::span<const std::uint64_t> seeds, const MeasureOptions& options) {
  if (seeds.empty()) throw InvalidArgument("at least one seed is required");
  for (const Mode& m : modes) check_codec_dims(m, dims);

  std::vector<RateReport> reports(modes.size());
  for (std::size_t m = 0; m < modes.size(); ++m) {
    RateReport& r = reports[m];
    r.mode = std::string(mode_kind_name(modes[m].kind));
    r.order = modes[m].kind == ModeKind::multistage ? format_order(*modes[m].order) : "";
    r.dims = dims;
    r.seeds = static_cast<int>(seeds.size());
    r.round_trip = options.verify ? "ok" : "skipped";
  }

  const auto positions = static_cast<double>(dims.positions());
  for (std::uint64_t seed : seeds) {
    const QuantGrid grid = quantize(sample_field(model, dims, seed, options.codec.exec), model);
    for (std::size_t m = 0; m < modes.size(); ++m) {
      RateReport& r = reports[m];
      CodingStats stats;
      const Bitstream bs = encode(grid, modes[m], model, options.codec, &stats);
      if (options.verify && !(decode(bs, model, options.codec) == grid)) r.round_trip = "fail";
      const double payload_bits = static_cast<double>(bs.payload.size()) * 8.0;
      r.total_bits += static_cast<double>(bs.bit_count());
      r.payload_bits += payload_bits;
      r.per_seed_bits_per_position.push_back(payload_bits / positions);
      r.theoretical_bits_per_position += stats.theoretical_bits / positions;
      if (r.per_stage_bits.empty()) r.per_stage_bits.assign(stats.group_bits.size(), 0.0);
      for (std::size_t g = 0; g < stats.group_bits.size(); ++g) r.per_stage_bits[g] += stats.group_bits[g];
    }
  }

  const auto count = static_cast<double>(seeds.size());
  for (RateReport& r : reports) {
    r.total_bits /= count;
    r.payload_bits /= count;
    r.theoretical_bits_per_position /= count;
    for (double& b : r.per_stage_bits) b /= count;
    double mean = 0.0;
    for (double b : r.per_seed_bits_per_position) mean += b;
    mean /= count;
    double ss = 0.0;
    for (double b : r.per_seed_bits_per_position) ss += (b - mean) * (b - mean);
    r.bits_per_position = mean;
    r.bits_per_position_sd = seeds.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
  }
  return reports;
}

}  // namespace mscs
