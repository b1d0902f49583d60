#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace btcsync {

using Bytes = std::vector<std::uint8_t>;
using ByteSpan = std::span<const std::uint8_t>;

/// 32-byte digest stored in internal (little-endian) byte order.
///
/// Text form uses the reversed-hex convention of Bitcoin tooling, so the
/// genesis hash prints as 000000000019d6...  Ordering compares the digest
/// as a 256-bit little-endian integer, which coincides with lexicographic
/// order of the display hex.
class Hash256 {
 public:
  static constexpr std::size_t kSize = 32;

  constexpr Hash256() = default;
  explicit constexpr Hash256(const std::array<std::uint8_t, kSize>& bytes) : bytes_(bytes) {}

  /// Parses display-order hex. Throws std::invalid_argument on bad input.
  static Hash256 from_hex(std::string_view hex);

  std::string to_hex() const;
  std::string short_hex() const { return to_hex().substr(0, 12); }

  const std::array<std::uint8_t, kSize>& bytes() const { return bytes_; }
  bool is_null() const;

  friend bool operator==(const Hash256&, const Hash256&) = default;
  friend std::strong_ordering operator<=>(const Hash256& a, const Hash256& b);

 private:
  std::array<std::uint8_t, kSize> bytes_{};
};

std::array<std::uint8_t, 32> sha256(ByteSpan data);

/// SHA-256 applied twice.
Hash256 sha256d(ByteSpan data);

/// Lowercase hex of raw bytes, in memory order.
std::string to_hex(ByteSpan data);

/// Throws std::invalid_argument on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

struct Hash256Hasher {
  std::size_t operator()(const Hash256& h) const noexcept {
    std::size_t out = 0;
    for (std::size_t i = 0; i < sizeof(out); ++i) out = (out << 8) | h.bytes()[i];
    return out;
  }
};

}  // namespace btcsync
