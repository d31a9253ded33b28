#include <doctest.h>

#include <cmath>
#include <random>

#include "mscs/error.hpp"
#include "mscs/gaussfield.hpp"
#include "mscs/mscodec.hpp"
#include "mscs/range_coder.hpp"

using namespace mscs;

TEST_CASE("frequency table validation") {
  CHECK_THROWS_AS(FrequencyTable({0, 100, 100, kFreqTotal}), std::invalid_argument);
  CHECK_THROWS_AS(FrequencyTable({0, 100}), std::invalid_argument);
  const FrequencyTable t({0, 10, 65000, kFreqTotal});
  CHECK(t.size() == 3);
  CHECK(t.find(0) == 0);
  CHECK(t.find(9) == 0);
  CHECK(t.find(10) == 1);
  CHECK(t.find(65535) == 2);
  CHECK(t.freq(2) == kFreqTotal - 65000);
}

TEST_CASE("single symbol stream is small") {
  const std::vector<FrequencyTable> tables{FrequencyTable({0, 32768, kFreqTotal})};
  const std::vector<std::size_t> sym{1};
  const auto bytes = range_encode(sym, tables);
  CHECK(bytes.size() <= 9);
  CHECK(range_decode(bytes, tables) == sym);
}

TEST_CASE("random sequences round-trip") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t len = rng() % 3000;
    std::vector<FrequencyTable> tables;
    std::vector<std::size_t> syms;
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t k = 1 + rng() % 40;
      std::vector<std::uint32_t> f(k, 1);
      std::uint32_t left = kFreqTotal - static_cast<std::uint32_t>(k);
      for (std::size_t j = 0; j + 1 < k && left; ++j) {
        const std::uint32_t take = static_cast<std::uint32_t>(rng() % (left + 1));
        f[j] += take;
        left -= take;
      }
      f[k - 1] += left;
      tables.push_back(FrequencyTable::from_frequencies(f));
      syms.push_back(rng() % k);
    }
    const auto bytes = range_encode(syms, tables);
    CHECK(range_decode(bytes, tables) == syms);
  }
}

TEST_CASE("extreme probabilities round-trip") {
  // Long runs of near-certain symbols exercise carry propagation.
  std::vector<std::uint32_t> f{1, kFreqTotal - 2, 1};
  const FrequencyTable skew = FrequencyTable::from_frequencies(f);
  std::vector<FrequencyTable> tables;
  std::vector<std::size_t> syms;
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20000; ++i) {
    tables.push_back(skew);
    const auto r = rng() % 1000;
    syms.push_back(r == 0 ? 0 : r == 1 ? 2 : 1);
  }
  CHECK(range_decode(range_encode(syms, tables), tables) == syms);
}

TEST_CASE("coded size approaches the entropy") {
  const FieldModel m;
  const std::int32_t limit = clamp_limit(m);
  const FrequencyTable table = symbol_table(0.0, 25.0, limit);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 5.0);
  const int count = 100000;
  std::vector<std::size_t> syms(count);
  for (auto& s : syms) s = static_cast<std::size_t>(std::clamp<long>(std::lround(normal(rng)), -limit, limit) + limit);
  const std::vector<FrequencyTable> tables(count, table);
  const auto bytes = range_encode(syms, tables);
  const double bound = discretized_gaussian_entropy(25.0) * count;
  CHECK(bytes.size() * 8.0 <= bound * 1.005 + 64);
  CHECK(bytes.size() * 8.0 >= bound * 0.99);
}

TEST_CASE("truncated payloads are rejected") {
  const std::vector<std::uint8_t> tiny{1, 2};
  CHECK_THROWS_AS(RangeDecoder{tiny}, CorruptStream);
  const FrequencyTable t({0, 1, kFreqTotal});
  std::vector<FrequencyTable> tables(2000, t);
  std::vector<std::size_t> syms(2000, 0);
  auto bytes = range_encode(syms, tables);
  bytes.resize(bytes.size() / 2);
  CHECK_THROWS_AS(range_decode(bytes, tables), CorruptStream);
}
