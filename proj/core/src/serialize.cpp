#include "btcsync/serialize.hpp"

namespace btcsync {

namespace {

std::size_t compact_size_len(std::uint64_t v) {
  if (v < 0xfd) return 1;
  if (v <= 0xffff) return 3;
  if (v <= 0xffffffff) return 5;
  return 9;
}

void write_transaction(ByteWriter& w, const Transaction& tx) {
  w.i32(tx.version);
  w.compact_size(tx.inputs.size());
  for (const auto& in : tx.inputs) {
    w.hash(in.prevout.txid);
    w.u32(in.prevout.vout);
    w.var_bytes(in.script_sig);
    w.u32(in.sequence);
  }
  w.compact_size(tx.outputs.size());
  for (const auto& out : tx.outputs) {
    w.u64(out.value);
    w.var_bytes(out.script_pubkey);
  }
  w.u32(tx.lock_time);
}

Transaction read_transaction(ByteReader& r) {
  Transaction tx;
  tx.version = r.i32();
  const auto n_in = r.compact_size();
  // Each input needs at least 41 bytes; reject counts the buffer cannot hold.
  if (n_in > r.remaining() / 41) throw DeserializeError("input count exceeds payload");
  tx.inputs.resize(n_in);
  for (auto& in : tx.inputs) {
    in.prevout.txid = r.hash();
    in.prevout.vout = r.u32();
    in.script_sig = r.var_bytes();
    in.sequence = r.u32();
  }
  const auto n_out = r.compact_size();
  if (n_out > r.remaining() / 9) throw DeserializeError("output count exceeds payload");
  tx.outputs.resize(n_out);
  for (auto& out : tx.outputs) {
    out.value = r.u64();
    out.script_pubkey = r.var_bytes();
  }
  tx.lock_time = r.u32();
  return tx;
}

}  // namespace

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::compact_size(std::uint64_t v) {
  if (v < 0xfd) {
    u8(static_cast<std::uint8_t>(v));
  } else if (v <= 0xffff) {
    u8(0xfd);
    u8(static_cast<std::uint8_t>(v));
    u8(static_cast<std::uint8_t>(v >> 8));
  } else if (v <= 0xffffffff) {
    u8(0xfe);
    u32(static_cast<std::uint32_t>(v));
  } else {
    u8(0xff);
    u64(v);
  }
}

void ByteWriter::hash(const Hash256& h) { raw(h.bytes()); }

void ByteWriter::var_bytes(ByteSpan data) {
  compact_size(data.size());
  raw(data);
}

ByteSpan ByteReader::take(std::size_t n) {
  if (n > remaining()) throw DeserializeError("unexpected end of data");
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }

std::uint32_t ByteReader::u32() {
  auto b = take(4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t ByteReader::u64() {
  const std::uint64_t lo = u32();
  const std::uint64_t hi = u32();
  return lo | (hi << 32);
}

std::uint64_t ByteReader::compact_size() {
  const auto tag = u8();
  std::uint64_t v = tag;
  if (tag == 0xfd) {
    v = u8();
    v |= static_cast<std::uint64_t>(u8()) << 8;
    if (v < 0xfd) throw DeserializeError("non-canonical compact size");
  } else if (tag == 0xfe) {
    v = u32();
    if (v <= 0xffff) throw DeserializeError("non-canonical compact size");
  } else if (tag == 0xff) {
    v = u64();
    if (v <= 0xffffffff) throw DeserializeError("non-canonical compact size");
  }
  return v;
}

Hash256 ByteReader::hash() {
  auto b = take(Hash256::kSize);
  std::array<std::uint8_t, Hash256::kSize> out{};
  std::copy(b.begin(), b.end(), out.begin());
  return Hash256(out);
}

Bytes ByteReader::var_bytes() {
  const auto n = compact_size();
  if (n > remaining()) throw DeserializeError("byte string exceeds payload");
  auto b = take(static_cast<std::size_t>(n));
  return Bytes(b.begin(), b.end());
}

std::array<std::uint8_t, kHeaderSize> serialize_header(const BlockHeader& header) {
  ByteWriter w;
  w.reserve(kHeaderSize);
  w.i32(header.version);
  w.hash(header.prev);
  w.hash(header.merkle_root);
  w.u32(header.time);
  w.u32(header.bits);
  w.u32(header.nonce);
  std::array<std::uint8_t, kHeaderSize> out{};
  std::copy(w.bytes().begin(), w.bytes().end(), out.begin());
  return out;
}

BlockHeader deserialize_header(ByteSpan bytes) {
  if (bytes.size() != kHeaderSize) throw DeserializeError("header must be 80 bytes");
  ByteReader r(bytes);
  BlockHeader h;
  h.version = r.i32();
  h.prev = r.hash();
  h.merkle_root = r.hash();
  h.time = r.u32();
  h.bits = r.u32();
  h.nonce = r.u32();
  return h;
}

Bytes serialize_transaction(const Transaction& tx) {
  ByteWriter w;
  write_transaction(w, tx);
  return std::move(w).bytes();
}

Transaction deserialize_transaction(ByteSpan bytes) {
  ByteReader r(bytes);
  auto tx = read_transaction(r);
  if (!r.done()) throw DeserializeError("trailing bytes after transaction");
  if (tx.inputs.empty()) throw DeserializeError("transaction has no inputs");
  if (tx.outputs.empty()) throw DeserializeError("transaction has no outputs");
  return tx;
}

Bytes serialize_block(const Block& block) {
  ByteWriter w;
  w.raw(serialize_header(block.header));
  w.compact_size(block.transactions.size());
  for (const auto& tx : block.transactions) write_transaction(w, tx);
  return std::move(w).bytes();
}

Block deserialize_block(ByteSpan bytes) {
  if (bytes.size() < kHeaderSize) throw DeserializeError("block shorter than a header");
  Block block;
  block.header = deserialize_header(bytes.first(kHeaderSize));
  ByteReader r(bytes.subspan(kHeaderSize));
  const auto n = r.compact_size();
  if (n > r.remaining() / 10) throw DeserializeError("transaction count exceeds payload");
  block.transactions.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) block.transactions.push_back(read_transaction(r));
  if (!r.done()) throw DeserializeError("trailing bytes after block");
  return block;
}

std::size_t serialized_size(const Transaction& tx) {
  std::size_t size = 4 + compact_size_len(tx.inputs.size()) + compact_size_len(tx.outputs.size()) + 4;
  for (const auto& in : tx.inputs)
    size += 32 + 4 + compact_size_len(in.script_sig.size()) + in.script_sig.size() + 4;
  for (const auto& out : tx.outputs)
    size += 8 + compact_size_len(out.script_pubkey.size()) + out.script_pubkey.size();
  return size;
}

std::size_t serialized_size(const Block& block) {
  std::size_t size = kHeaderSize + compact_size_len(block.transactions.size());
  for (const auto& tx : block.transactions) size += serialized_size(tx);
  return size;
}

std::string header_to_hex(const BlockHeader& header) { return to_hex(serialize_header(header)); }

BlockHeader header_from_hex(std::string_view hex) { return deserialize_header(from_hex(hex)); }

}  // namespace btcsync
