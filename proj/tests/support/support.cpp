#include "support.hpp"

#include <algorithm>

#include "btcsync/address.hpp"
#include "btcsync/serialize.hpp"
#include "btcsync/validation.hpp"
#include "btcsync/work.hpp"

namespace btcsync::testing {

using boost::multiprecision::cpp_int;

BlockHeader synthetic_header(const Hash256& prev, std::uint32_t bits, std::uint32_t salt) {
  BlockHeader h;
  h.version = 1;
  h.prev = prev;
  h.bits = bits;
  h.time = 1'600'000'000 + salt;
  h.nonce = salt;
  return h;
}

BlockTree random_tree(std::mt19937_64& rng, const RandomTreeOptions& opts) {
  static constexpr std::uint32_t kBits[] = {0x207fffff, 0x1f00ffff, 0x2000ffff, 0x1e7fffff};
  std::uniform_int_distribution<std::size_t> size(1, opts.max_blocks);
  std::uniform_int_distribution<std::size_t> bits_pick(0, std::size(kBits) - 1);
  std::bernoulli_distribution fork(opts.fork_chance);

  const auto pick_bits = [&] { return opts.vary_bits ? kBits[bits_pick(rng)] : kBits[0]; };
  std::uint32_t salt = 0;
  BlockTree tree(synthetic_header(Hash256{}, pick_bits(), salt++));
  std::vector<Hash256> all{tree.root()};
  std::vector<Hash256> leaves{tree.root()};
  const auto target = size(rng);
  while (tree.size() < target) {
    Hash256 parent;
    if (fork(rng)) {
      parent = all[std::uniform_int_distribution<std::size_t>(0, all.size() - 1)(rng)];
    } else {
      parent = leaves[std::uniform_int_distribution<std::size_t>(0, leaves.size() - 1)(rng)];
    }
    if (tree.node(parent).children.size() >= opts.max_children) continue;
    const auto header = synthetic_header(parent, pick_bits(), salt++);
    tree.insert(header);
    const auto h = header.hash();
    all.push_back(h);
    std::erase(leaves, parent);
    leaves.push_back(h);
  }
  return tree;
}

BruteForce::BruteForce(const BlockTree& tree) : tree_(tree) {
  dfs(tree.root(), DepthKind::kConfirmation);
  dfs(tree.root(), DepthKind::kWork);
}

cpp_int BruteForce::cost(const Hash256& h, DepthKind kind) const {
  if (kind == DepthKind::kConfirmation) return 1;
  // floor(2^256 / (target + 1)) from the expanded nBits.
  const auto& bits = tree_.node(h).header.bits;
  const cpp_int mantissa = bits & 0x007fffff;
  const int exponent = static_cast<int>(bits >> 24);
  const cpp_int target =
      exponent <= 3 ? cpp_int(mantissa >> (8 * (3 - exponent))) : cpp_int(mantissa << (8 * (exponent - 3)));
  return (cpp_int(1) << 256) / (target + 1);
}

cpp_int BruteForce::dfs(const Hash256& h, DepthKind kind) {
  cpp_int best = 0;
  for (const auto& c : tree_.node(h).children) best = std::max(best, dfs(c, kind));
  const cpp_int d = best + cost(h, kind);
  (kind == DepthKind::kConfirmation ? conf_ : work_)[h] = d;
  return d;
}

cpp_int BruteForce::depth(const Hash256& h, DepthKind kind) const {
  return (kind == DepthKind::kConfirmation ? conf_ : work_).at(h);
}

cpp_int BruteForce::lead(const Hash256& h, DepthKind kind) const {
  cpp_int out = depth(h, kind);
  for (const auto& rival : tree_.at_height(tree_.node(h).height)) {
    if (rival == h) continue;
    out = std::min(out, depth(h, kind) - depth(rival, kind));
  }
  return out;
}

bool BruteForce::stable(const Hash256& h, std::uint64_t delta, DepthKind kind) const {
  return lead(h, kind) >= cost(h, kind) * delta;
}

ChainBuilder::ChainBuilder()
    : params_(ChainParams::for_network(NetworkKind::kRegtest)),
      genesis_(genesis_block(NetworkKind::kRegtest)),
      tree_(genesis_.header, params_.work_policy),
      clock_(genesis_.header.time) {
  blocks_.emplace(genesis_.hash(), genesis_);
}

const Bytes& ChainBuilder::default_script() {
  static const Bytes script = p2pkh_script(Hash160{0x11, 0x22});
  return script;
}

const Block& ChainBuilder::mine(const Hash256& parent, std::vector<Transaction> txs,
                                const Bytes& payout) {
  const auto& p = tree_.node(parent);
  Transaction cb;
  ByteWriter tag;
  tag.u32(p.height + 1);
  tag.u32(tag_++);
  cb.inputs = {TxIn{OutPoint::null(), std::move(tag).bytes(), 0xffffffff}};
  cb.outputs = {TxOut{50'0000'0000, payout}};

  Block b;
  b.transactions.push_back(std::move(cb));
  for (auto& tx : txs) b.transactions.push_back(std::move(tx));
  b.header.version = 0x20000000;
  b.header.prev = parent;
  b.header.bits = expected_next_bits(p, tree_, params_);
  b.header.merkle_root = block_merkle_root(b);
  clock_ = std::max(clock_ + 1, median_time_past(p, tree_, params_) + 1);
  b.header.time = clock_;
  const auto target = *CompactTarget::expand(b.header.bits);
  while (hash_to_uint(b.header.hash()) > target) ++b.header.nonce;
  tree_.insert(b.header);
  return blocks_.emplace(b.hash(), std::move(b)).first->second;
}

std::vector<Hash256> ChainBuilder::extend(const Hash256& parent, std::size_t count,
                                          const Bytes& payout) {
  std::vector<Hash256> out;
  Hash256 cur = parent;
  for (std::size_t i = 0; i < count; ++i) {
    cur = mine(cur, {}, payout).hash();
    out.push_back(cur);
  }
  return out;
}

Transaction spend(const OutPoint& from, std::uint64_t value, const Bytes& script) {
  Transaction tx;
  tx.inputs = {TxIn{from, Bytes{0x51}, 0xffffffff}};
  tx.outputs = {TxOut{value, script}};
  return tx;
}

std::map<OutPoint, UtxoEntry> replay_chain(const std::vector<const Block*>& chain) {
  std::map<OutPoint, UtxoEntry> live;
  for (std::uint32_t height = 0; height < chain.size(); ++height) {
    for (const auto& tx : chain[height]->transactions) {
      if (!tx.is_coinbase())
        for (const auto& in : tx.inputs) live.erase(in.prevout);
      const auto txid = tx.txid();
      for (std::uint32_t i = 0; i < tx.outputs.size(); ++i)
        live[OutPoint{txid, i}] = UtxoEntry{tx.outputs[i], height};
    }
  }
  return live;
}

}  // namespace btcsync::testing
