#include "btcsync/hash.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <stdexcept>

namespace btcsync {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::array<std::uint8_t, 32> sha256(ByteSpan data) {
  std::array<std::uint8_t, 32> out{};
  SHA256(data.data(), data.size(), out.data());
  return out;
}

Hash256 sha256d(ByteSpan data) {
  const auto first = sha256(data);
  return Hash256(sha256(first));
}

std::string to_hex(ByteSpan data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("hex string has odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex character");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

Hash256 Hash256::from_hex(std::string_view hex) {
  if (hex.size() != 2 * kSize) throw std::invalid_argument("hash must be 64 hex characters");
  auto raw = btcsync::from_hex(hex);
  std::array<std::uint8_t, kSize> bytes{};
  std::reverse_copy(raw.begin(), raw.end(), bytes.begin());
  return Hash256(bytes);
}

std::string Hash256::to_hex() const {
  std::array<std::uint8_t, kSize> rev{};
  std::reverse_copy(bytes_.begin(), bytes_.end(), rev.begin());
  return btcsync::to_hex(rev);
}

bool Hash256::is_null() const {
  return std::all_of(bytes_.begin(), bytes_.end(), [](auto b) { return b == 0; });
}

std::strong_ordering operator<=>(const Hash256& a, const Hash256& b) {
  for (std::size_t i = Hash256::kSize; i-- > 0;) {
    if (auto c = a.bytes_[i] <=> b.bytes_[i]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

}  // namespace btcsync
