#include "mscs/ctxmask.hpp"

#include <bit>

#include "mscs/error.hpp"

namespace mscs {

namespace {

int wrap(int a, int n) {
  const int r = a % n;
  return r < 0 ? r + n : r;
}

ContextMask mask_for_cell(const StageMap& map, int row, int col, int stage) {
  const int n = map.n();
  ContextMask m;
  for (int dy = -ContextMask::kRadius; dy <= ContextMask::kRadius; ++dy) {
    for (int dx = -ContextMask::kRadius; dx <= ContextMask::kRadius; ++dx) {
      if (dy == 0 && dx == 0) continue;
      if (map.stage_of(wrap(row + dy, n), wrap(col + dx, n)) < stage) m.set(dy, dx);
    }
  }
  return m;
}

}  // namespace

ContextMask ContextMask::from_bits(std::uint32_t bits) {
  ContextMask m;
  m.bits_ = bits & kAllBits & ~(1u << kCenterBit);
  return m;
}

ContextMask ContextMask::from_offsets(const std::vector<Offset>& offsets) {
  ContextMask m;
  for (const Offset& o : offsets) m.set(o.dy, o.dx);
  return m;
}

bool ContextMask::available(int dy, int dx) const {
  if (dy < -kRadius || dy > kRadius || dx < -kRadius || dx > kRadius) return false;
  return (bits_ >> bit_of(dy, dx)) & 1u;
}

int ContextMask::count() const { return std::popcount(bits_); }

std::vector<Offset> ContextMask::offsets() const {
  std::vector<Offset> out;
  out.reserve(count());
  for (std::uint32_t b = bits_; b != 0; b &= b - 1) out.push_back(offset_of(std::countr_zero(b)));
  return out;
}

void ContextMask::set(int dy, int dx, bool value) {
  if (dy < -kRadius || dy > kRadius || dx < -kRadius || dx > kRadius) {
    throw InvalidArgument("offset outside the 5x5 window");
  }
  if (dy == 0 && dx == 0) {
    if (value) throw InvalidArgument("a cell cannot be its own context");
    return;
  }
  const std::uint32_t bit = 1u << bit_of(dy, dx);
  bits_ = value ? (bits_ | bit) : (bits_ & ~bit);
}

ContextMask stage_mask(const StageMap& map, int stage) {
  if (stage < 0 || stage >= map.num_stages()) {
    throw InvalidArgument("stage " + std::to_string(stage) + " out of range [0, " +
                          std::to_string(map.num_stages()) + ")");
  }
  const std::vector<int> cells = map.cells_of_stage(stage);
  const ContextMask first = mask_for_cell(map, cells.front() / map.n(), cells.front() % map.n(), stage);
  for (std::size_t i = 1; i < cells.size(); ++i) {
    if (mask_for_cell(map, cells[i] / map.n(), cells[i] % map.n(), stage) != first) {
      throw InvalidArgument("cells of stage " + std::to_string(stage) + " see different context masks");
    }
  }
  return first;
}

ContextMask brute_force_mask(const StageMap& map, int stage, const LatentDims& dims) {
  const int n = map.n();
  if (dims.height % n != 0 || dims.width % n != 0) throw InvalidArgument("dims not divisible by patch side");
  if (dims.height < 8 || dims.width < 8) throw InvalidArgument("brute-force mask needs at least 8x8");
  if (stage < 0 || stage >= map.num_stages()) throw InvalidArgument("stage out of range");

  std::vector<int> grid(static_cast<std::size_t>(dims.positions()));
  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) grid[y * dims.width + x] = map.stage_of(y % n, x % n);
  }
  const int r = ContextMask::kRadius;
  for (int y = r; y < dims.height - r; ++y) {
    for (int x = r; x < dims.width - r; ++x) {
      if (grid[y * dims.width + x] != stage) continue;
      ContextMask m;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          if ((dy != 0 || dx != 0) && grid[(y + dy) * dims.width + (x + dx)] < stage) m.set(dy, dx);
        }
      }
      return m;
    }
  }
  throw InvalidArgument("no interior position of the requested stage");
}

BorderClippedMask clip_mask(const ContextMask& mask, int y, int x, const LatentDims& dims) {
  if (y < 0 || y >= dims.height || x < 0 || x >= dims.width) throw InvalidArgument("position outside grid");
  std::uint32_t keep = 0;
  for (std::uint32_t b = mask.bits(); b != 0; b &= b - 1) {
    const int bit = std::countr_zero(b);
    const Offset o = ContextMask::offset_of(bit);
    const int yy = y + o.dy;
    const int xx = x + o.dx;
    if (yy >= 0 && yy < dims.height && xx >= 0 && xx < dims.width) keep |= 1u << bit;
  }
  return {mask, ContextMask::from_bits(keep)};
}

ContextMask ar_causal_mask() {
  ContextMask m;
  for (int dy = -ContextMask::kRadius; dy <= 0; ++dy) {
    for (int dx = -ContextMask::kRadius; dx <= ContextMask::kRadius; ++dx) {
      if (dy < 0 || dx < 0) m.set(dy, dx);
    }
  }
  return m;
}

int four_adjacency_count(const ContextMask& mask) {
  return int{mask.available(-1, 0)} + int{mask.available(1, 0)} + int{mask.available(0, -1)} +
         int{mask.available(0, 1)};
}

std::string render_ascii(const ContextMask& mask) {
  std::string out;
  for (int dy = -ContextMask::kRadius; dy <= ContextMask::kRadius; ++dy) {
    for (int dx = -ContextMask::kRadius; dx <= ContextMask::kRadius; ++dx) {
      out.push_back(dy == 0 && dx == 0 ? 'o' : (mask.available(dy, dx) ? '#' : '.'));
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace mscs
