#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "btcsync/primitives.hpp"

namespace btcsync {

inline constexpr std::size_t kHeaderSize = 80;

class DeserializeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ByteWriter {
 public:
  void reserve(std::size_t n) { out_.reserve(n); }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v);
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void u64(std::uint64_t v);
  void compact_size(std::uint64_t v);
  void hash(const Hash256& h);
  void raw(ByteSpan data) { out_.insert(out_.end(), data.begin(), data.end()); }
  void var_bytes(ByteSpan data);

  const Bytes& bytes() const& { return out_; }
  Bytes bytes() && { return std::move(out_); }

 private:
  Bytes out_;
};

class ByteReader {
 public:
  explicit ByteReader(ByteSpan data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::uint64_t u64();
  std::uint64_t compact_size();
  Hash256 hash();
  Bytes var_bytes();

  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }

 private:
  ByteSpan take(std::size_t n);

  ByteSpan data_;
  std::size_t pos_ = 0;
};

std::array<std::uint8_t, kHeaderSize> serialize_header(const BlockHeader& header);
/// Requires exactly 80 bytes.
BlockHeader deserialize_header(ByteSpan bytes);

Bytes serialize_transaction(const Transaction& tx);
/// Strict parse: the whole span must be consumed and the transaction must
/// have at least one input and one output.
Transaction deserialize_transaction(ByteSpan bytes);

Bytes serialize_block(const Block& block);
Block deserialize_block(ByteSpan bytes);

/// Serialized size without materializing the bytes.
std::size_t serialized_size(const Transaction& tx);
std::size_t serialized_size(const Block& block);

std::string header_to_hex(const BlockHeader& header);
BlockHeader header_from_hex(std::string_view hex);

}  // namespace btcsync
