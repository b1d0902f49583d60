#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

#include "btcsync/hash.hpp"

namespace btcsync {

using Uint256 = boost::multiprecision::uint256_t;
using Uint512 = boost::multiprecision::uint512_t;
/// Signed type wide enough for differences and small multiples of Work.
using WorkDelta = boost::multiprecision::int512_t;

/// Interprets the digest as a 256-bit little-endian integer.
Uint256 hash_to_uint(const Hash256& hash);
Hash256 uint_to_hash(const Uint256& value);

/// Expected hash work of a block. Addition is exact; desk-scale chains stay
/// far below 2^256 total work.
class Work {
 public:
  Work() = default;
  explicit Work(Uint256 amount) : amount_(std::move(amount)) {}
  explicit Work(std::uint64_t amount) : amount_(amount) {}

  const Uint256& amount() const { return amount_; }
  std::string to_string() const { return amount_.str(); }

  Work& operator+=(const Work& other) {
    amount_ += other.amount_;
    return *this;
  }
  friend Work operator+(Work a, const Work& b) { return a += b; }
  friend bool operator==(const Work& a, const Work& b) { return a.amount_ == b.amount_; }
  friend std::strong_ordering operator<=>(const Work& a, const Work& b) {
    if (a.amount_ < b.amount_) return std::strong_ordering::less;
    if (a.amount_ > b.amount_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

 private:
  Uint256 amount_{0};
};

enum class WorkPolicy {
  kTarget,  // floor(2^256 / (target + 1)), independent of mining luck
  kHash,    // floor(2^256 / (hash + 1)), strictly decreasing in the achieved hash
};

/// Bitcoin compact ("nBits") target encoding.
struct CompactTarget {
  /// Expands bits; nullopt for negative, overflowing or zero targets.
  static std::optional<Uint256> expand(std::uint32_t bits);
  static std::uint32_t compress(const Uint256& target);
};

/// floor(2^256 / (target + 1)).
Work work_from_target(const Uint256& target);

/// Work of a compact target under the target policy. Throws
/// std::invalid_argument when bits is malformed.
Work work_of(std::uint32_t bits);

}  // namespace btcsync
