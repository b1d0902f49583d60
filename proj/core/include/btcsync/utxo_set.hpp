#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "btcsync/chain_params.hpp"
#include "btcsync/primitives.hpp"

namespace btcsync {

struct UtxoEntry {
  TxOut output;
  std::uint32_t height = 0;

  friend bool operator==(const UtxoEntry&, const UtxoEntry&) = default;
};

struct Utxo {
  OutPoint outpoint;
  std::uint64_t value = 0;
  std::uint32_t height = 0;

  friend bool operator==(const Utxo&, const Utxo&) = default;
};

/// Height descending, then txid, then vout. This is the API ordering and the
/// pagination key.
struct UtxoOrder {
  bool operator()(const Utxo& a, const Utxo& b) const {
    if (a.height != b.height) return a.height > b.height;
    return a.outpoint < b.outpoint;
  }
};

struct BlockApplyStats {
  std::size_t inserted = 0;
  std::size_t removed = 0;
  /// Inputs whose outpoint was not present; transactions are not validated.
  std::size_t missing_inputs = 0;
};

/// Unspent outputs keyed by outpoint with a secondary index by address.
class UtxoSet {
 public:
  using Map = std::map<OutPoint, UtxoEntry>;

  explicit UtxoSet(NetworkKind network) : network_(network) {}

  void insert(const OutPoint& outpoint, TxOut output, std::uint32_t height);
  bool erase(const OutPoint& outpoint);
  const UtxoEntry* find(const OutPoint& outpoint) const;

  /// UTXOs of an address in UtxoOrder.
  std::vector<Utxo> for_address(const std::string& address) const;

  const Map& entries() const { return by_outpoint_; }
  std::size_t size() const { return by_outpoint_.size(); }
  NetworkKind network() const { return network_; }

  /// Both indexes describe the same set.
  bool is_consistent() const;

 private:
  NetworkKind network_;
  Map by_outpoint_;
  std::unordered_map<std::string, std::set<Utxo, UtxoOrder>> by_address_;
};

/// Applies a newly stabilized block: spends every non-coinbase input, then
/// adds every output at `height`, transaction by transaction.
BlockApplyStats process_block(UtxoSet& utxos, const Block& block, std::uint32_t height);

}  // namespace btcsync
