#include "btcsync/utxo_set.hpp"

#include "btcsync/address.hpp"

namespace btcsync {

void UtxoSet::insert(const OutPoint& outpoint, TxOut output, std::uint32_t height) {
  erase(outpoint);
  const auto address = address_of_script(output.script_pubkey, network_);
  by_address_[address].insert(Utxo{outpoint, output.value, height});
  by_outpoint_.emplace(outpoint, UtxoEntry{std::move(output), height});
}

bool UtxoSet::erase(const OutPoint& outpoint) {
  auto it = by_outpoint_.find(outpoint);
  if (it == by_outpoint_.end()) return false;
  const auto address = address_of_script(it->second.output.script_pubkey, network_);
  auto idx = by_address_.find(address);
  idx->second.erase(Utxo{outpoint, it->second.output.value, it->second.height});
  if (idx->second.empty()) by_address_.erase(idx);
  by_outpoint_.erase(it);
  return true;
}

const UtxoEntry* UtxoSet::find(const OutPoint& outpoint) const {
  auto it = by_outpoint_.find(outpoint);
  return it == by_outpoint_.end() ? nullptr : &it->second;
}

std::vector<Utxo> UtxoSet::for_address(const std::string& address) const {
  auto it = by_address_.find(address);
  if (it == by_address_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

bool UtxoSet::is_consistent() const {
  std::size_t indexed = 0;
  for (const auto& [address, set] : by_address_) {
    for (const auto& u : set) {
      auto e = find(u.outpoint);
      if (!e || e->height != u.height || e->output.value != u.value) return false;
      if (address_of_script(e->output.script_pubkey, network_) != address) return false;
    }
    indexed += set.size();
  }
  return indexed == by_outpoint_.size();
}

BlockApplyStats process_block(UtxoSet& utxos, const Block& block, std::uint32_t height) {
  BlockApplyStats stats;
  for (const auto& tx : block.transactions) {
    if (!tx.is_coinbase()) {
      for (const auto& in : tx.inputs) {
        if (utxos.erase(in.prevout)) {
          ++stats.removed;
        } else {
          ++stats.missing_inputs;
        }
      }
    }
    const auto txid = tx.txid();
    for (std::uint32_t i = 0; i < tx.outputs.size(); ++i) {
      utxos.insert(OutPoint{txid, i}, tx.outputs[i], height);
      ++stats.inserted;
    }
  }
  return stats;
}

}  // namespace btcsync
