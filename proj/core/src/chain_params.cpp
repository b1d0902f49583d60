#include "btcsync/chain_params.hpp"

#include <stdexcept>

#include "btcsync/serialize.hpp"

namespace btcsync {

std::string_view to_string(NetworkKind network) {
  switch (network) {
    case NetworkKind::kMainnet: return "mainnet";
    case NetworkKind::kTestnet: return "testnet";
    case NetworkKind::kRegtest: return "regtest";
  }
  return "unknown";
}

std::optional<NetworkKind> parse_network(std::string_view name) {
  if (name == "mainnet") return NetworkKind::kMainnet;
  if (name == "testnet") return NetworkKind::kTestnet;
  if (name == "regtest") return NetworkKind::kRegtest;
  return std::nullopt;
}

ChainParams ChainParams::for_network(NetworkKind network) {
  ChainParams p;
  p.network = network;
  switch (network) {
    case NetworkKind::kMainnet:
    case NetworkKind::kTestnet:
      p.pow_limit_bits = 0x1d00ffff;
      p.retarget = true;
      break;
    case NetworkKind::kRegtest:
      p.pow_limit_bits = 0x207fffff;
      p.retarget = false;
      break;
  }
  p.pow_limit = *CompactTarget::expand(p.pow_limit_bits);
  return p;
}

Block genesis_block(NetworkKind network) {
  static const Transaction coinbase = deserialize_transaction(from_hex(
    "01000000010000000000000000000000000000000000000000000000000000000000000000ff"
    "ffffff4d04ffff001d0104455468652054696d65732030332f4a616e2f32303039204368616e"
    "63656c6c6f72206f6e206272696e6b206f66207365636f6e64206261696c6f757420666f7220"
    "62616e6b73ffffffff0100f2052a01000000434104678afdb0fe5548271967f1a67130b7105c"
    "d6a828e03909a67962e0ea1f61deb649f6bc3f4cef38c4f35504e51ec112de5c384df7ba0b8d"
    "578a4c702b6bf11d5fac00000000"));
  Block b;
  b.transactions = {coinbase};
  b.header.version = 1;
  b.header.merkle_root = block_merkle_root(b);
  switch (network) {
    case NetworkKind::kMainnet:
      b.header.time = 1231006505;
      b.header.bits = 0x1d00ffff;
      b.header.nonce = 2083236893;
      break;
    case NetworkKind::kTestnet:
      b.header.time = 1296688602;
      b.header.bits = 0x1d00ffff;
      b.header.nonce = 414098458;
      break;
    case NetworkKind::kRegtest:
      b.header.time = 1296688602;
      b.header.bits = 0x207fffff;
      b.header.nonce = 2;
      break;
  }
  return b;
}

Work header_work(const BlockHeader& header, WorkPolicy policy) {
  if (policy == WorkPolicy::kHash) return work_from_target(hash_to_uint(header.hash()));
  return work_of(header.bits);
}

}  // namespace btcsync
