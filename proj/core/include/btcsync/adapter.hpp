#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "btcsync/block_tree.hpp"
#include "btcsync/chain_params.hpp"
#include "btcsync/messages.hpp"
#include "btcsync/validation.hpp"

namespace btcsync {

struct AdapterConfig {
  /// ℓ, the number of outbound peer connections to maintain.
  std::size_t target_connections = 5;
  /// Address pool thresholds t_l and t_u.
  std::size_t addr_low = 500;
  std::size_t addr_high = 2000;
  /// Regtest style: connect to `preconfigured_peers` and never discover.
  bool skip_discovery = false;
  std::vector<PeerId> preconfigured_peers;

  std::size_t max_headers = 100;
  std::size_t max_size_bytes = 2 * 1024 * 1024;
  /// At or above this anchor height a response carries at most one block.
  std::uint32_t checkpoint_height = std::numeric_limits<std::uint32_t>::max();
  SimTime tx_expiry = std::chrono::minutes(10);
  SimTime fetch_retry = std::chrono::seconds(30);
  std::size_t max_headers_per_message = 2000;

  static AdapterConfig for_network(NetworkKind network);
};

/// Source of peer addresses and connections (DNS seeds and addr gossip in
/// production, the simulated population here).
class PeerDirectory {
 public:
  virtual ~PeerDirectory() = default;
  virtual std::vector<PeerId> request_addresses(std::size_t max) = 0;
  virtual bool connect(PeerId peer) = 0;
};

struct TxCacheEntry {
  Transaction tx;
  Hash256 txid;
  SimTime inserted_at{0};
  std::set<PeerId> delivered_to;
};

enum class AcceptStatus { kAccepted, kDuplicate, kRejected };

struct AcceptResult {
  AcceptStatus status = AcceptStatus::kAccepted;
  std::optional<Violation> violation;
};

struct SuccessorLimits {
  std::size_t max_headers = 100;
  std::size_t max_size_bytes = 2 * 1024 * 1024;
  std::uint32_t checkpoint_height = std::numeric_limits<std::uint32_t>::max();
};

struct SuccessorSelection {
  GetSuccessorsResponse response;
  /// Headers visited whose block is not available locally.
  std::vector<Hash256> missing;
};

using BodyLookup = std::function<const Block*(const Hash256&)>;
using HashSet = std::unordered_set<Hash256, Hash256Hasher>;

/// Breadth-first walk from the anchor that selects blocks the requester can
/// validate parents-first, and collects the remaining headers.
///
/// The anchor counts as processed for the parent test and is never returned.
/// Siblings are visited in ascending hash order. Block size is a soft limit:
/// the block that crosses it is still included. Throws UnknownBlockError for
/// an unknown anchor.
SuccessorSelection assemble_successors(const BlockTree& headers, const BodyLookup& bodies,
                                       const Hash256& anchor, const HashSet& processed,
                                       const SuccessorLimits& limits);

/// SPV-style endpoint between the Bitcoin peers and the canister.
///
/// Keeps every valid header it hears about (no fork resolution), fetches
/// blocks on demand, relays outbound transactions, and answers canister
/// requests. Outbound peer traffic is queued and collected with take_outbox().
class Adapter {
 public:
  Adapter(AdapterConfig config, ChainParams params, const BlockHeader& genesis,
          std::uint64_t seed);

  void discover_peers(PeerDirectory& directory);
  void on_peer_disconnected(PeerId peer);

  AcceptResult accept_header(const BlockHeader& header, SimTime now);
  /// Stores a block whose header is known and whose merkle root matches.
  bool offer_block(const Block& block);

  GetSuccessorsResponse handle_request(const GetSuccessorsRequest& request, SimTime now);
  void tick_tx_cache(SimTime now);
  void on_peer_message(PeerId from, const WireMessage& message, SimTime now,
                       PeerDirectory& directory);

  std::vector<Envelope> take_outbox();

  const BlockTree& header_tree() const { return headers_; }
  const std::unordered_map<Hash256, Block, Hash256Hasher>& block_store() const { return blocks_; }
  const std::set<PeerId>& peers() const { return peers_; }
  const std::set<PeerId>& address_pool() const { return pool_; }
  const std::vector<TxCacheEntry>& tx_cache() const { return tx_cache_; }
  const std::map<Hash256, SimTime>& pending_fetches() const { return pending_; }
  const AdapterConfig& config() const { return config_; }
  std::size_t penalties() const { return penalties_; }
  bool discovering() const { return discovering_; }

  std::vector<Hash256> locator() const;

 private:
  void add_peer(PeerId peer);
  void penalize(PeerId peer, PeerDirectory& directory);
  void schedule_fetch(const Hash256& hash, SimTime now);
  void cache_transaction(Transaction tx, SimTime now);
  void send(PeerId peer, WireMessage message);

  AdapterConfig config_;
  ChainParams params_;
  BlockTree headers_;
  std::unordered_map<Hash256, Block, Hash256Hasher> blocks_;
  std::set<PeerId> peers_;
  std::set<PeerId> pool_;
  bool discovering_ = true;
  std::vector<TxCacheEntry> tx_cache_;
  std::map<Hash256, SimTime> pending_;
  std::unordered_map<Hash256, PeerId, Hash256Hasher> header_origin_;
  std::size_t round_robin_ = 0;
  std::size_t penalties_ = 0;
  std::vector<Envelope> outbox_;
  std::mt19937_64 rng_;
};

}  // namespace btcsync
