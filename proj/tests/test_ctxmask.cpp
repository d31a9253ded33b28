#include <doctest.h>

#include <random>

#include "mscs/ctxmask.hpp"
#include "mscs/error.hpp"
#include "mscs/ordersearch.hpp"

using namespace mscs;

namespace {

ContextMask mask_where(bool (*pred)(int, int)) {
  ContextMask m;
  for (int dy = -2; dy <= 2; ++dy)
    for (int dx = -2; dx <= 2; ++dx)
      if ((dy || dx) && pred(dy, dx)) m.set(dy, dx);
  return m;
}

PatchOrder random_order(int n, std::mt19937_64& rng) {
  std::vector<int> s(n * n);
  for (int i = 0; i < n * n; ++i) s[i] = i;
  std::shuffle(s.begin(), s.end(), rng);
  return PatchOrder(n, s);
}

}  // namespace

TEST_CASE("2x2 raster masks") {
  const StageMap raster = StageMap::from_order(PatchOrder::raster(2));
  CHECK(stage_mask(raster, 0).empty());
  const ContextMask s1 = stage_mask(raster, 1);
  CHECK(s1 == mask_where([](int dy, int dx) { return dy % 2 == 0 && (dx == -1 || dx == 1); }));
  CHECK(s1.count() == 6);
  const ContextMask s2 = stage_mask(raster, 2);
  CHECK(s2 == mask_where([](int dy, int) { return dy == -1 || dy == 1; }));
  CHECK(s2.count() == 10);
  const ContextMask s3 = stage_mask(raster, 3);
  CHECK(s3 == mask_where([](int dy, int dx) { return dy % 2 != 0 || dx % 2 != 0; }));
  CHECK(s3.count() == 16);
  CHECK(s3 == brute_force_mask(raster, 3, LatentDims(8, 8)));
}

TEST_CASE("checkerboard masks") {
  const ContextMask s1 = stage_mask(StageMap::checkerboard(), 1);
  CHECK(s1.count() == 12);
  CHECK(s1 == mask_where([](int dy, int dx) { return (dy + dx) % 2 != 0; }));
  CHECK(s1 == brute_force_mask(StageMap::checkerboard(), 1, LatentDims(8, 8)));
  CHECK(four_adjacency_count(s1) == 4);
  CHECK(stage_mask(StageMap::checkerboard(1), 1) == s1);
}

TEST_CASE("stage_mask equals the brute-force oracle") {
  for (const PatchOrder& o : all_orders(2)) {
    const StageMap map = StageMap::from_order(o);
    for (int s = 0; s < 4; ++s) CHECK(stage_mask(map, s) == brute_force_mask(map, s, LatentDims(8, 8)));
  }
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const StageMap map = StageMap::from_order(random_order(4, rng));
    for (int s = 0; s < 16; ++s) CHECK(stage_mask(map, s) == brute_force_mask(map, s, LatentDims(16, 16)));
  }
  const StageMap ref4 = StageMap::from_order(parse_order("025417b86cda3ef9"));
  CHECK(stage_mask(ref4, 9) == brute_force_mask(ref4, 9, LatentDims(16, 16)));
  CHECK(brute_force_mask(StageMap::from_order(PatchOrder::raster(4)), 0, LatentDims(16, 16)).empty());
  CHECK_THROWS_AS(brute_force_mask(StageMap::from_order(PatchOrder::raster(4)), 0, LatentDims(6, 6)), InvalidArgument);
}

TEST_CASE("masks are monotone along the decoding order") {
  const StageMap ref4 = StageMap::from_order(parse_order("025417b86cda3ef9"));
  // With n = 4 no window offset wraps onto the cell itself.
  const ContextMask last = stage_mask(ref4, 15);
  CHECK(last.count() == 24);
  const StageMap r2 = StageMap::from_order(PatchOrder::raster(2));
  CHECK(stage_mask(r2, 1).subset_of(stage_mask(r2, 3)));
}

TEST_CASE("four-adjacency") {
  CHECK(four_adjacency_count(stage_mask(StageMap::from_order(parse_order("0231")), 1)) == 0);
  CHECK(four_adjacency_count(ContextMask{}) == 0);
  CHECK(four_adjacency_count(stage_mask(StageMap::from_order(PatchOrder::raster(2)), 1)) == 2);
}

TEST_CASE("clip_mask") {
  const LatentDims dims(64, 64);
  const ContextMask full = ContextMask::from_bits(ContextMask::kAllBits);
  CHECK(full.count() == 24);
  CHECK(clip_mask(full, 4, 4, dims).clipped == full);
  const ContextMask corner = clip_mask(full, 0, 0, dims).clipped;
  CHECK(corner == mask_where([](int dy, int dx) { return dy >= 0 && dx >= 0; }));
  const ContextMask edge = clip_mask(full, 0, 5, dims).clipped;
  CHECK(edge == mask_where([](int dy, int) { return dy >= 0; }));
  const BorderClippedMask b = clip_mask(full, 63, 1, dims);
  CHECK(b.clipped.subset_of(b.base));
  CHECK_FALSE(b.clipped.available(0, -2));
  CHECK(b.clipped.available(0, -1));
}

TEST_CASE("ar causal mask") {
  const ContextMask ar = ar_causal_mask();
  CHECK(ar.available(-1, 2));
  CHECK_FALSE(ar.available(0, 1));
  CHECK(ar.available(0, -1));
  CHECK(ar.count() == 12);
}

TEST_CASE("mask bits and rendering") {
  CHECK(ContextMask::bit_of(-2, -2) == 0);
  CHECK(ContextMask::bit_of(2, 2) == 24);
  CHECK(ContextMask::offset_of(7) == Offset{-1, 0});
  CHECK(ContextMask::from_bits(1u << ContextMask::kCenterBit).empty());
  const ContextMask m = ContextMask::from_offsets({{1, 0}, {-1, 2}, {0, -1}});
  const std::vector<Offset> expect{{-1, 2}, {0, -1}, {1, 0}};
  CHECK(m.offsets() == expect);
  CHECK(render_ascii(stage_mask(StageMap::from_order(PatchOrder::raster(2)), 2)) ==
        ".....\n#####\n..o..\n#####\n.....\n");
  CHECK(render_ascii(ContextMask{}) == ".....\n.....\n..o..\n.....\n.....\n");
  CHECK_THROWS_AS(stage_mask(StageMap::from_order(PatchOrder::raster(2)), 4), InvalidArgument);
}
