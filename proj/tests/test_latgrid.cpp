#include <doctest.h>

#include "mscs/error.hpp"
#include "mscs/latgrid.hpp"

using namespace mscs;

TEST_CASE("parse_order reads row-major hex") {
  CHECK(parse_order("0123").stages() == std::vector<int>{0, 1, 2, 3});
  CHECK(parse_order("0123456789abcdef") == PatchOrder::raster(4));
  const PatchOrder ref4 = parse_order("025417b86cda3ef9");
  CHECK(ref4.n() == 4);
  CHECK(ref4.stage_at(0, 1) == 2);
  CHECK(ref4.stage_at(3, 3) == 9);
  CHECK(ref4.cell_of_stage(15) == 14);
  CHECK(parse_order("0213").stages() == std::vector<int>{0, 2, 1, 3});
  CHECK(parse_order("025417B86CDA3EF9") == ref4);
  CHECK(format_order(ref4) == "025417b86cda3ef9");
  CHECK(parse_order("0") == PatchOrder::raster(1));
}

TEST_CASE("parse_order rejects malformed input") {
  CHECK_THROWS_AS(parse_order("0113"), InvalidArgument);
  CHECK_THROWS_AS(parse_order("012"), InvalidArgument);
  CHECK_THROWS_AS(parse_order("0123456789abcdeg"), InvalidArgument);
  CHECK_THROWS_AS(parse_order(""), InvalidArgument);
  CHECK_THROWS_AS(parse_order("0124"), InvalidArgument);
  CHECK_THROWS_AS(PatchOrder(5, std::vector<int>(25, 0)), InvalidArgument);
}

TEST_CASE("stage_of_position is periodic") {
  const PatchOrder raster = parse_order("0123");
  CHECK(stage_of_position(raster, 0, 1) == 1);
  CHECK(stage_of_position(raster, 7, 4) == 2);
  CHECK(stage_of_position(parse_order("0231"), 1, 1) == 1);
  const PatchOrder ref4 = parse_order("025417b86cda3ef9");
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 12; ++x) CHECK(stage_of_position(ref4, y, x) == stage_of_position(ref4, y + 4, x + 8));
}

TEST_CASE("anchor fractions") {
  CHECK(anchor_fraction(StageMap::from_order(PatchOrder::raster(2))) == Fraction{1, 4});
  CHECK(anchor_fraction(StageMap::from_order(PatchOrder::raster(4))) == Fraction{1, 16});
  CHECK(anchor_fraction(StageMap::checkerboard()) == Fraction{1, 2});
  CHECK(anchor_fraction(StageMap::from_order(PatchOrder::raster(1))) == Fraction{1, 1});
}

TEST_CASE("checkerboard stage map") {
  const StageMap cb = StageMap::checkerboard(0);
  CHECK(cb.num_stages() == 2);
  CHECK_FALSE(cb.bijective());
  CHECK(cb.cells_of_stage(0) == std::vector<int>{0, 3});
  CHECK(StageMap::checkerboard(1).cells_of_stage(0) == std::vector<int>{1, 2});
  CHECK_THROWS_AS(StageMap(2, {0, 0, 2, 2}), InvalidArgument);
}

TEST_CASE("padding") {
  CHECK(required_padding_multiple(1) == 64);
  CHECK(required_padding_multiple(2) == 64);
  CHECK(required_padding_multiple(3) == 192);
  CHECK(required_padding_multiple(4) == 64);
  CHECK(PatchOrder::raster(3).impractical());
  CHECK_FALSE(PatchOrder::raster(4).impractical());

  PaddedDims p = pad_image_dims(768, 512, 4);
  CHECK(p.height == 768);
  CHECK(p.width == 512);
  CHECK(p.overhead == 0.0);
  p = pad_image_dims(768, 512, 3);
  CHECK(p.height == 768);
  CHECK(p.width == 576);
  CHECK(p.overhead == doctest::Approx(0.125).epsilon(1e-15));
  p = pad_image_dims(1, 1, 2);
  CHECK(p.height == 64);
  CHECK(p.width == 64);
  CHECK(p.overhead == 4095.0);
  CHECK_THROWS_AS(pad_image_dims(0, 5, 2), InvalidArgument);
  CHECK_THROWS_AS(pad_image_dims(5, 5, 5), InvalidArgument);
}

TEST_CASE("padding matches a brute-force search over multiples") {
  for (int n = 1; n <= 4; ++n) {
    for (std::int64_t h : {1, 63, 64, 65, 191, 193, 500, 768}) {
      std::int64_t best = 0;
      for (std::int64_t c = h;; ++c) {
        if (c % (16 * n) == 0 && c % 64 == 0) {
          best = c;
          break;
        }
      }
      CHECK(pad_image_dims(h, 7, n).height == best);
    }
  }
}

TEST_CASE("modes") {
  CHECK(parse_mode_kind("ar") == ModeKind::ar);
  CHECK_THROWS_AS(parse_mode_kind("raster"), InvalidArgument);
  CHECK(Mode::multistage(PatchOrder::raster(4)).period() == 4);
  CHECK(Mode::checkerboard().period() == 2);
  CHECK(Mode::ar().period() == 1);
  CHECK(Mode::multistage(parse_order("0231")).label() == "multistage:0231");
  CHECK_THROWS_AS(require_compatible(Mode::multistage(PatchOrder::raster(4)), LatentDims(65, 64)), InvalidArgument);
  CHECK_NOTHROW(require_compatible(Mode::multistage(PatchOrder::raster(4)), LatentDims(64, 64)));
  CHECK_THROWS_AS(LatentDims(0, 3), InvalidArgument);
}
