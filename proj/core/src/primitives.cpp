#include "btcsync/primitives.hpp"

#include "btcsync/serialize.hpp"

namespace btcsync {

Hash256 BlockHeader::hash() const { return sha256d(serialize_header(*this)); }

Hash256 Transaction::txid() const { return sha256d(serialize_transaction(*this)); }

Hash256 compute_merkle_root(std::vector<Hash256> leaves) {
  if (leaves.empty()) return Hash256{};
  while (leaves.size() > 1) {
    if (leaves.size() % 2 != 0) leaves.push_back(leaves.back());
    std::vector<Hash256> next;
    next.reserve(leaves.size() / 2);
    for (std::size_t i = 0; i < leaves.size(); i += 2) {
      std::array<std::uint8_t, 64> pair{};
      std::copy(leaves[i].bytes().begin(), leaves[i].bytes().end(), pair.begin());
      std::copy(leaves[i + 1].bytes().begin(), leaves[i + 1].bytes().end(), pair.begin() + 32);
      next.push_back(sha256d(pair));
    }
    leaves = std::move(next);
  }
  return leaves.front();
}

Hash256 block_merkle_root(const Block& block) {
  std::vector<Hash256> ids;
  ids.reserve(block.transactions.size());
  for (const auto& tx : block.transactions) ids.push_back(tx.txid());
  return compute_merkle_root(std::move(ids));
}

}  // namespace btcsync
