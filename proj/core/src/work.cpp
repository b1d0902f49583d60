#include "btcsync/work.hpp"

#include <stdexcept>

namespace btcsync {

Uint256 hash_to_uint(const Hash256& hash) {
  Uint256 out;
  const auto& b = hash.bytes();
  import_bits(out, b.rbegin(), b.rend(), 8, true);
  return out;
}

Hash256 uint_to_hash(const Uint256& value) {
  std::array<std::uint8_t, 32> bytes{};
  Uint256 v = value;
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<std::uint8_t>(v & 0xff);
    v >>= 8;
  }
  return Hash256(bytes);
}

std::optional<Uint256> CompactTarget::expand(std::uint32_t bits) {
  const std::uint32_t size = bits >> 24;
  std::uint32_t word = bits & 0x007fffff;
  const bool negative = word != 0 && (bits & 0x00800000) != 0;
  const bool overflow =
      word != 0 && (size > 34 || (word > 0xff && size > 33) || (word > 0xffff && size > 32));
  if (negative || overflow) return std::nullopt;
  Uint256 target;
  if (size <= 3) {
    word >>= 8 * (3 - size);
    target = word;
  } else {
    target = word;
    target <<= 8 * (size - 3);
  }
  if (target == 0) return std::nullopt;
  return target;
}

std::uint32_t CompactTarget::compress(const Uint256& target) {
  std::uint32_t size = 0;
  for (Uint256 t = target; t != 0; t >>= 8) ++size;
  std::uint32_t compact = 0;
  if (size <= 3) {
    compact = static_cast<std::uint32_t>(target) << (8 * (3 - size));
  } else {
    compact = static_cast<std::uint32_t>(target >> (8 * (size - 3)));
  }
  // The sign bit is not part of the mantissa; shift it into the exponent.
  if (compact & 0x00800000) {
    compact >>= 8;
    ++size;
  }
  return compact | (size << 24);
}

Work work_from_target(const Uint256& target) {
  Uint512 numerator = 1;
  numerator <<= 256;
  const Uint512 denominator = Uint512(target) + 1;
  return Work(static_cast<Uint256>(numerator / denominator));
}

Work work_of(std::uint32_t bits) {
  auto target = CompactTarget::expand(bits);
  if (!target) throw std::invalid_argument("malformed compact target");
  return work_from_target(*target);
}

}  // namespace btcsync
