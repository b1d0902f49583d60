#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "btcsync/primitives.hpp"
#include "btcsync/work.hpp"

namespace btcsync {

enum class NetworkKind { kMainnet, kTestnet, kRegtest };

std::string_view to_string(NetworkKind network);
std::optional<NetworkKind> parse_network(std::string_view name);

/// Consensus knobs used by header validation.
struct ChainParams {
  NetworkKind network = NetworkKind::kRegtest;
  std::uint32_t pow_limit_bits = 0x207fffff;
  Uint256 pow_limit;
  /// When false the target is constant: every header must repeat its parent's bits.
  bool retarget = false;
  std::uint32_t retarget_interval = 2016;
  std::int64_t target_timespan = 14 * 24 * 60 * 60;
  std::uint32_t median_time_span = 11;
  std::uint32_t max_future_drift = 2 * 60 * 60;
  WorkPolicy work_policy = WorkPolicy::kTarget;

  static ChainParams for_network(NetworkKind network);
};

/// The network's well-known genesis block (the three share one coinbase).
Block genesis_block(NetworkKind network);

/// Work contributed by a header under the configured policy.
Work header_work(const BlockHeader& header, WorkPolicy policy);

}  // namespace btcsync
