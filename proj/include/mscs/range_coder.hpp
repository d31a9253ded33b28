#pragma once

// Byte-oriented range coder with carry propagation (32-bit range, 33-bit
// low, pending-0xFF counter). Frequencies are 16-bit: every model's total
// mass is exactly 2^16.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mscs {

inline constexpr int kFreqBits = 16;
inline constexpr std::uint32_t kFreqTotal = 1u << kFreqBits;

/// Cumulative frequency table: cdf[0] = 0, cdf[size] = 2^16, strictly
/// increasing.
class FrequencyTable {
 public:
  FrequencyTable() = default;
  explicit FrequencyTable(std::vector<std::uint32_t> cdf);
  /// Builds from per-symbol frequencies summing to 2^16, each >= 1.
  static FrequencyTable from_frequencies(std::span<const std::uint32_t> freqs);

  [[nodiscard]] std::size_t size() const { return cdf_.size() - 1; }
  [[nodiscard]] std::uint32_t low(std::size_t symbol) const { return cdf_[symbol]; }
  [[nodiscard]] std::uint32_t freq(std::size_t symbol) const { return cdf_[symbol + 1] - cdf_[symbol]; }
  /// Symbol whose interval contains `target` (< 2^16).
  [[nodiscard]] std::size_t find(std::uint32_t target) const;

 private:
  std::vector<std::uint32_t> cdf_{0u, kFreqTotal};
};

class RangeEncoder {
 public:
  void encode(std::uint32_t cum_low, std::uint32_t freq);
  void encode(const FrequencyTable& table, std::size_t symbol) {
    encode(table.low(symbol), table.freq(symbol));
  }
  /// Flushes the state and returns the byte stream. The encoder is spent.
  std::vector<std::uint8_t> finish();

 private:
  void shift_low();

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t pending_ = 1;
  bool leading_ = true;  // the first cached byte is always zero and is not stored
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  /// Throws CorruptStream when fewer than 4 bytes are available.
  explicit RangeDecoder(std::span<const std::uint8_t> bytes);

  /// Cumulative target in [0, 2^16); must be followed by consume().
  std::uint32_t peek();
  void consume(std::uint32_t cum_low, std::uint32_t freq);
  std::size_t decode(const FrequencyTable& table);

  [[nodiscard]] std::size_t bytes_consumed() const { return pos_; }

 private:
  std::uint8_t next_byte();

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint32_t code_ = 0;
  std::uint32_t step_ = 0;
};

/// Convenience wrappers: one table per symbol.
std::vector<std::uint8_t> range_encode(std::span<const std::size_t> symbols,
                                       std::span<const FrequencyTable> tables);
std::vector<std::size_t> range_decode(std::span<const std::uint8_t> bytes,
                                      std::span<const FrequencyTable> tables);

}  // namespace mscs
