#include "mscs/latgrid.hpp"

#include <algorithm>
#include <numeric>

#include "mscs/error.hpp"

namespace mscs {

namespace {

int euclid_mod(int a, int n) {
  const int r = a % n;
  return r < 0 ? r + n : r;
}

int hex_value(char ch) {
  if (ch >= '0' && ch <= '9') return ch - '0';
  if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
  if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
  return -1;
}

}  // namespace

LatentDims::LatentDims(int h, int w) : height(h), width(w) {
  if (h < 1 || w < 1) {
    throw InvalidArgument("latent dims must be >= 1, got " + std::to_string(h) + "x" + std::to_string(w));
  }
}

PatchOrder::PatchOrder(int n, std::vector<int> stages) : n_(n), stages_(std::move(stages)) {
  if (n < 1 || n > kMaxSide) {
    throw InvalidArgument("patch side must be in 1..4, got " + std::to_string(n));
  }
  if (static_cast<int>(stages_.size()) != n * n) {
    throw InvalidArgument("order needs " + std::to_string(n * n) + " stages, got " +
                          std::to_string(stages_.size()));
  }
  std::vector<bool> seen(stages_.size(), false);
  for (int s : stages_) {
    if (s < 0 || s >= n * n) {
      throw InvalidArgument("stage " + std::to_string(s) + " out of range for n=" + std::to_string(n));
    }
    if (seen[s]) throw InvalidArgument("duplicate stage " + std::to_string(s) + " in order");
    seen[s] = true;
  }
  impractical_ = required_padding_multiple(n) > 64;
}

PatchOrder PatchOrder::raster(int n) {
  std::vector<int> s(static_cast<std::size_t>(n) * n);
  std::iota(s.begin(), s.end(), 0);
  return PatchOrder(n, std::move(s));
}

int PatchOrder::cell_of_stage(int stage) const {
  const auto it = std::find(stages_.begin(), stages_.end(), stage);
  if (it == stages_.end()) throw InvalidArgument("stage " + std::to_string(stage) + " not in order");
  return static_cast<int>(it - stages_.begin());
}

bool operator<(const PatchOrder& a, const PatchOrder& b) {
  if (a.n_ != b.n_) return a.n_ < b.n_;
  return a.stages_ < b.stages_;
}

PatchOrder parse_order(std::string_view text) {
  int n = 0;
  switch (text.size()) {
    case 1: n = 1; break;
    case 4: n = 2; break;
    case 9: n = 3; break;
    case 16: n = 4; break;
    default:
      throw InvalidArgument("order '" + std::string(text) + "' must have 1, 4, 9 or 16 hex digits");
  }
  std::vector<int> stages;
  stages.reserve(text.size());
  for (char ch : text) {
    const int v = hex_value(ch);
    if (v < 0) throw InvalidArgument("order '" + std::string(text) + "' has non-hex digit '" + ch + "'");
    stages.push_back(v);
  }
  return PatchOrder(n, std::move(stages));
}

std::string format_order(const PatchOrder& order) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(order.stages().size());
  for (int s : order.stages()) out.push_back(kDigits[s]);
  return out;
}

StageMap::StageMap(int n, std::vector<int> stage_of) : n_(n), stage_of_(std::move(stage_of)) {
  if (n < 1 || n > PatchOrder::kMaxSide) throw InvalidArgument("stage map side must be in 1..4");
  if (static_cast<int>(stage_of_.size()) != n * n) throw InvalidArgument("stage map size mismatch");
  const int top = *std::max_element(stage_of_.begin(), stage_of_.end());
  if (*std::min_element(stage_of_.begin(), stage_of_.end()) < 0) {
    throw InvalidArgument("negative stage in stage map");
  }
  num_stages_ = top + 1;
  for (int s = 0; s < num_stages_; ++s) {
    if (std::find(stage_of_.begin(), stage_of_.end(), s) == stage_of_.end()) {
      throw InvalidArgument("stage " + std::to_string(s) + " has no cells");
    }
  }
}

StageMap StageMap::from_order(const PatchOrder& order) { return StageMap(order.n(), order.stages()); }

StageMap StageMap::checkerboard(int anchor_parity) {
  if (anchor_parity != 0 && anchor_parity != 1) throw InvalidArgument("checkerboard parity must be 0 or 1");
  std::vector<int> s(4);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) s[r * 2 + c] = ((r + c) % 2 == anchor_parity) ? 0 : 1;
  }
  return StageMap(2, std::move(s));
}

std::vector<int> StageMap::cells_of_stage(int stage) const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(stage_of_.size()); ++i) {
    if (stage_of_[i] == stage) out.push_back(i);
  }
  return out;
}

int stage_of_position(const PatchOrder& order, int y, int x) {
  if (y < 0 || x < 0) throw InvalidArgument("position must be non-negative");
  return order.stage_at(y % order.n(), x % order.n());
}

int stage_of_position(const StageMap& map, int y, int x) {
  return map.stage_of(euclid_mod(y, map.n()), euclid_mod(x, map.n()));
}

Fraction anchor_fraction(const StageMap& map) {
  const auto total = static_cast<std::int64_t>(map.cells().size());
  const auto anchors = static_cast<std::int64_t>(std::count(map.cells().begin(), map.cells().end(), 0));
  const std::int64_t g = std::gcd(anchors, total);
  return {anchors / g, total / g};
}

std::int64_t required_padding_multiple(int n) {
  if (n < 1 || n > PatchOrder::kMaxSide) throw InvalidArgument("patch side must be in 1..4");
  return std::lcm(std::int64_t{16} * n, std::int64_t{64});
}

PaddedDims pad_image_dims(std::int64_t height, std::int64_t width, int n) {
  if (height < 1 || width < 1) throw InvalidArgument("image dims must be >= 1");
  const std::int64_t m = required_padding_multiple(n);
  PaddedDims out;
  out.height = (height + m - 1) / m * m;
  out.width = (width + m - 1) / m * m;
  out.overhead = static_cast<double>(out.height * out.width) / static_cast<double>(height * width) - 1.0;
  return out;
}

int Mode::period() const {
  switch (kind) {
    case ModeKind::checkerboard: return 2;
    case ModeKind::multistage: return order->n();
    default: return 1;
  }
}

std::string Mode::label() const {
  if (kind == ModeKind::multistage) return "multistage:" + format_order(*order);
  return std::string(mode_kind_name(kind));
}

std::string_view mode_kind_name(ModeKind kind) {
  switch (kind) {
    case ModeKind::nocontext: return "nocontext";
    case ModeKind::checkerboard: return "checkerboard";
    case ModeKind::ar: return "ar";
    case ModeKind::multistage: return "multistage";
  }
  return "?";
}

ModeKind parse_mode_kind(std::string_view text) {
  if (text == "nocontext") return ModeKind::nocontext;
  if (text == "checkerboard") return ModeKind::checkerboard;
  if (text == "ar") return ModeKind::ar;
  if (text == "multistage") return ModeKind::multistage;
  throw InvalidArgument("unknown mode '" + std::string(text) + "'");
}

void require_compatible(const Mode& mode, const LatentDims& dims) {
  if (mode.kind == ModeKind::multistage && !mode.order) throw InvalidArgument("multistage mode needs an order");
  const int p = mode.period();
  if (dims.height % p != 0 || dims.width % p != 0) {
    throw InvalidArgument("grid " + std::to_string(dims.height) + "x" + std::to_string(dims.width) +
                          " is not divisible by patch side " + std::to_string(p));
  }
}

}  // namespace mscs
