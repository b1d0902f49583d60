#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "btcsync/primitives.hpp"

namespace btcsync {

/// Simulated wall clock: milliseconds since the Unix epoch.
using SimTime = std::chrono::milliseconds;

inline std::uint32_t unix_seconds(SimTime t) {
  return static_cast<std::uint32_t>(std::chrono::duration_cast<std::chrono::seconds>(t).count());
}

using PeerId = std::uint32_t;

// Simulated P2P messages exchanged between an adapter and Bitcoin peers.

enum class InvType { kTx, kBlock };

struct InvItem {
  InvType type = InvType::kTx;
  Hash256 hash;
  friend bool operator==(const InvItem&, const InvItem&) = default;
};

struct InvMsg {
  std::vector<InvItem> items;
};
struct GetDataMsg {
  std::vector<InvItem> items;
};
struct HeadersMsg {
  std::vector<BlockHeader> headers;
};
struct GetHeadersMsg {
  std::vector<Hash256> locator;
};
struct BlockMsg {
  Block block;
};
struct TxMsg {
  Transaction tx;
};
struct AddrMsg {
  std::vector<PeerId> addresses;
};

using WireMessage =
    std::variant<InvMsg, GetDataMsg, HeadersMsg, GetHeadersMsg, BlockMsg, TxMsg, AddrMsg>;

std::string_view message_kind(const WireMessage& msg);

/// One-line text rendering for message traces, e.g.
/// `out 17 headers n=2 first=0000ab...`.
std::string trace_line(std::string_view direction, PeerId peer, const WireMessage& msg);

struct Envelope {
  PeerId peer = 0;
  WireMessage message;
};

// Canister <-> adapter exchange.

struct GetSuccessorsRequest {
  BlockHeader anchor;
  /// Headers above the anchor whose blocks the canister already holds.
  std::vector<Hash256> processed;
  /// Serialized outbound transactions.
  std::vector<Bytes> transactions;
};

struct SuccessorBlock {
  Block block;
  BlockHeader header;
};

struct GetSuccessorsResponse {
  std::vector<SuccessorBlock> blocks;
  std::vector<BlockHeader> next_headers;
};

}  // namespace btcsync
