#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <vector>

#include "btcsync/hash.hpp"

namespace btcsync {

inline constexpr std::uint64_t kMaxMoney = 21'000'000ULL * 100'000'000ULL;

struct BlockHeader {
  std::int32_t version = 0;
  Hash256 prev;
  Hash256 merkle_root;
  std::uint32_t time = 0;
  std::uint32_t bits = 0;
  std::uint32_t nonce = 0;

  Hash256 hash() const;

  friend bool operator==(const BlockHeader&, const BlockHeader&) = default;
};

struct OutPoint {
  Hash256 txid;
  std::uint32_t vout = 0;

  bool is_null() const { return txid.is_null() && vout == 0xffffffff; }
  static OutPoint null() { return OutPoint{Hash256{}, 0xffffffff}; }

  friend bool operator==(const OutPoint&, const OutPoint&) = default;
  friend auto operator<=>(const OutPoint&, const OutPoint&) = default;
};

struct TxIn {
  OutPoint prevout;
  Bytes script_sig;
  std::uint32_t sequence = 0xffffffff;

  friend bool operator==(const TxIn&, const TxIn&) = default;
};

struct TxOut {
  std::uint64_t value = 0;
  Bytes script_pubkey;

  friend bool operator==(const TxOut&, const TxOut&) = default;
};

struct Transaction {
  std::int32_t version = 1;
  std::vector<TxIn> inputs;
  std::vector<TxOut> outputs;
  std::uint32_t lock_time = 0;

  Hash256 txid() const;
  bool is_coinbase() const { return inputs.size() == 1 && inputs.front().prevout.is_null(); }

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

struct Block {
  BlockHeader header;
  std::vector<Transaction> transactions;

  Hash256 hash() const { return header.hash(); }

  friend bool operator==(const Block&, const Block&) = default;
};

/// Bitcoin merkle root; an odd level duplicates its last entry.
Hash256 compute_merkle_root(std::vector<Hash256> leaves);
Hash256 block_merkle_root(const Block& block);

}  // namespace btcsync
