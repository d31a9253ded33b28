#include "mscs/range_coder.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "mscs/error.hpp"

namespace mscs {

namespace {

constexpr std::uint32_t kTop = 1u << 24;

}  // namespace

FrequencyTable::FrequencyTable(std::vector<std::uint32_t> cdf) : cdf_(std::move(cdf)) {
  if (cdf_.size() < 2 || cdf_.front() != 0 || cdf_.back() != kFreqTotal) {
    throw std::invalid_argument("cdf must start at 0 and end at 2^16");
  }
  for (std::size_t i = 1; i < cdf_.size(); ++i) {
    if (cdf_[i] <= cdf_[i - 1]) throw std::invalid_argument("zero-width bin at symbol " + std::to_string(i - 1));
  }
}

FrequencyTable FrequencyTable::from_frequencies(std::span<const std::uint32_t> freqs) {
  std::vector<std::uint32_t> cdf(freqs.size() + 1, 0u);
  for (std::size_t i = 0; i < freqs.size(); ++i) cdf[i + 1] = cdf[i] + freqs[i];
  return FrequencyTable(std::move(cdf));
}

std::size_t FrequencyTable::find(std::uint32_t target) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
  return static_cast<std::size_t>(it - cdf_.begin()) - 1;
}

void RangeEncoder::encode(std::uint32_t cum_low, std::uint32_t freq) {
  if (freq == 0) throw std::invalid_argument("zero-width bin");
  if (cum_low + freq > kFreqTotal) throw std::invalid_argument("bin exceeds total mass");
  const std::uint32_t r = range_ >> kFreqBits;
  low_ += std::uint64_t{r} * cum_low;
  range_ = r * freq;
  while (range_ < kTop) {
    range_ <<= 8;
    shift_low();
  }
}

void RangeEncoder::shift_low() {
  if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const auto carry = static_cast<std::uint8_t>(low_ >> 32);
    std::uint8_t byte = cache_;
    do {
      if (!leading_) out_.push_back(static_cast<std::uint8_t>(byte + carry));
      leading_ = false;
      byte = 0xFF;
    } while (--pending_ != 0);
    cache_ = static_cast<std::uint8_t>(low_ >> 24);
  }
  ++pending_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

std::vector<std::uint8_t> RangeEncoder::finish() {
  for (int i = 0; i < 5; ++i) shift_low();
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> bytes) : in_(bytes) {
  if (in_.size() < 4) throw CorruptStream("range-coded payload shorter than its 4-byte flush");
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
  if (pos_ >= in_.size()) throw CorruptStream("truncated range-coded payload");
  return in_[pos_++];
}

std::uint32_t RangeDecoder::peek() {
  step_ = range_ >> kFreqBits;
  // Only a corrupted stream can land outside [0, 2^16).
  return std::min<std::uint32_t>(code_ / step_, kFreqTotal - 1);
}

void RangeDecoder::consume(std::uint32_t cum_low, std::uint32_t freq) {
  code_ -= step_ * cum_low;
  range_ = step_ * freq;
  while (range_ < kTop) {
    range_ <<= 8;
    code_ = (code_ << 8) | next_byte();
  }
}

std::size_t RangeDecoder::decode(const FrequencyTable& table) {
  const std::size_t sym = table.find(peek());
  consume(table.low(sym), table.freq(sym));
  return sym;
}

std::vector<std::uint8_t> range_encode(std::span<const std::size_t> symbols,
                                       std::span<const FrequencyTable> tables) {
  if (symbols.size() != tables.size()) throw std::invalid_argument("one table per symbol required");
  RangeEncoder enc;
  for (std::size_t i = 0; i < symbols.size(); ++i) enc.encode(tables[i], symbols[i]);
  return enc.finish();
}

std::vector<std::size_t> range_decode(std::span<const std::uint8_t> bytes,
                                      std::span<const FrequencyTable> tables) {
  RangeDecoder dec(bytes);
  std::vector<std::size_t> out;
  out.reserve(tables.size());
  for (const FrequencyTable& t : tables) out.push_back(dec.decode(t));
  return out;
}

}  // namespace mscs
