#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "btcsync/block_tree.hpp"
#include "btcsync/chain_params.hpp"
#include "btcsync/primitives.hpp"
#include "btcsync/stability.hpp"
#include "btcsync/utxo_set.hpp"

namespace btcsync::testing {

/// Header with the given parent and bits; `salt` makes siblings distinct.
/// No proof of work: for trees that never see validation.
BlockHeader synthetic_header(const Hash256& prev, std::uint32_t bits, std::uint32_t salt);

struct RandomTreeOptions {
  std::size_t max_blocks = 200;
  std::size_t max_children = 4;
  /// Chance that a new block forks off an earlier block instead of a leaf.
  double fork_chance = 0.3;
  /// Mixes targets so work differs between blocks.
  bool vary_bits = true;
};

BlockTree random_tree(std::mt19937_64& rng, const RandomTreeOptions& opts = {});

/// Depths and stability recomputed from scratch by depth-first search.
struct BruteForce {
  explicit BruteForce(const BlockTree& tree);

  boost::multiprecision::cpp_int depth(const Hash256& h, DepthKind kind) const;
  /// lead in cost units: min(d(b), min over rivals of d(b) - d(b')).
  boost::multiprecision::cpp_int lead(const Hash256& h, DepthKind kind) const;
  /// lead >= delta * unit, with unit 1 or w(reference).
  bool stable(const Hash256& h, std::uint64_t delta, DepthKind kind) const;

 private:
  boost::multiprecision::cpp_int cost(const Hash256& h, DepthKind kind) const;
  boost::multiprecision::cpp_int dfs(const Hash256& h, DepthKind kind);
  const BlockTree& tree_;
  std::map<Hash256, boost::multiprecision::cpp_int> conf_, work_;
};

/// Regtest blocks with real proof of work, for canister and adapter tests.
class ChainBuilder {
 public:
  ChainBuilder();

  const Block& genesis() const { return genesis_; }
  const ChainParams& params() const { return params_; }
  const BlockTree& tree() const { return tree_; }
  const Block& block(const Hash256& h) const { return blocks_.at(h); }

  /// Mines a child of `parent` paying the coinbase to `payout`.
  const Block& mine(const Hash256& parent, std::vector<Transaction> txs = {},
                    const Bytes& payout = default_script());
  /// `count` blocks on top of `parent`; returns them in order.
  std::vector<Hash256> extend(const Hash256& parent, std::size_t count,
                              const Bytes& payout = default_script());

  static const Bytes& default_script();
  /// Unix seconds later than every mined block.
  std::uint32_t now() const { return clock_ + 60; }

 private:
  ChainParams params_;
  Block genesis_;
  BlockTree tree_;
  std::map<Hash256, Block> blocks_;
  std::uint32_t clock_;
  std::uint32_t tag_ = 0;
};

/// Transaction spending `from` into one output of `value` to `script`.
Transaction spend(const OutPoint& from, std::uint64_t value, const Bytes& script);

/// UTXO map obtained by applying the blocks in order, one pass, without
/// the library's UtxoSet.
std::map<OutPoint, UtxoEntry> replay_chain(const std::vector<const Block*>& chain);

}  // namespace btcsync::testing
