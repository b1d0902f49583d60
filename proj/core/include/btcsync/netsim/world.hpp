#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "btcsync/adapter.hpp"
#include "btcsync/canister.hpp"
#include "btcsync/netsim/params.hpp"

namespace btcsync::netsim {

struct Observation {
  SimTime time{0};
  std::string event;
  std::string subject;
  std::string detail;
};

/// CSV with header `time,event,subject,detail`; time in milliseconds since
/// the simulation start.
void write_observations_csv(std::ostream& out, const std::vector<Observation>& log,
                            SimTime origin);

/// Derives an independent stream seed; stable across platforms.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Discrete-event world: honest miners sharing one chain view, a peer
/// population with a corrupted fraction, an adversary, and a subnet of n
/// nodes each running an adapter, sharing one canister.
class World {
 public:
  World(SimParams params, std::uint64_t seed);
  ~World();
  World(const World&) = delete;
  World& operator=(const World&) = delete;

  /// Processes the earliest event; false when the queue is empty.
  bool step();
  void run_until(SimTime t);
  void run_for(SimTime d) { run_until(now_ + d); }

  SimTime now() const { return now_; }
  SimTime origin() const { return origin_; }
  SimTime elapsed() const { return now_ - origin_; }

  void set_mining(bool on);
  bool mining() const { return mining_; }
  void start_attack();
  void start_downtime();
  void stop_downtime();
  bool in_downtime() const { return downtime_; }
  /// Honest blocks forking `depth` blocks below the honest tip.
  void inject_fork(std::uint32_t depth, std::uint32_t length);

  Canister& canister() { return *canister_; }
  const Canister& canister() const { return *canister_; }
  const std::vector<Adapter>& adapters() const { return adapters_; }
  const BlockTree& honest_tree() const { return honest_; }
  Hash256 honest_tip() const;
  std::uint32_t honest_height() const;
  std::uint32_t adversary_height() const;
  /// Honest or adversary block body.
  const Block* find_block(const Hash256& hash) const;
  bool is_corrupted(PeerId peer) const { return corrupted_[peer]; }

  const std::vector<std::string>& addresses() const { return addresses_; }
  /// Output scripts behind addresses(), index for index.
  const std::vector<Bytes>& scripts() const { return scripts_; }
  const std::string& adversary_address() const { return adversary_address_; }
  std::optional<Hash256> corrupting_txid() const;
  std::int64_t corrupt_max_confirmations() const { return corrupt_max_conf_; }

  const SimParams& params() const { return params_; }
  std::map<std::string, double> metrics() const;
  const std::vector<Observation>& observations() const { return log_; }
  void observe(std::string event, std::string subject, std::string detail);

 private:
  struct MineEvent {
    bool honest = true;
    std::uint64_t epoch = 0;
  };
  struct ToPeer {
    std::size_t adapter = 0;
    PeerId peer = 0;
    WireMessage message;
  };
  struct ToAdapter {
    std::size_t adapter = 0;
    PeerId peer = 0;
    WireMessage message;
  };
  struct RoundEvent {};
  struct TickEvent {};
  using Payload = std::variant<MineEvent, ToPeer, ToAdapter, RoundEvent, TickEvent>;
  struct Event {
    SimTime time{0};
    std::uint64_t seq = 0;
    Payload payload;
  };
  struct Spendable {
    OutPoint outpoint;
    std::uint64_t value = 0;
  };
  class Directory;

  void schedule(SimTime at, Payload payload);
  void schedule_mining(bool honest);
  SimTime latency();
  void dispatch(Event& ev);

  void on_mine(const MineEvent& ev);
  void on_to_peer(ToPeer& ev);
  void on_to_adapter(ToAdapter& ev);
  void on_round();
  void on_tick();

  Block make_block(const BlockTree& tree, const Hash256& parent, std::vector<Transaction> txs,
                   const Bytes& payout);
  Transaction random_spend();
  const Bytes& random_script();
  void add_honest_block(const Block& block, std::string_view how);
  void mature_outputs();
  void mine_adversary();
  void restart_fork();
  void release_fork();
  std::uint32_t budget_reference() const;
  std::optional<GetSuccessorsResponse> malicious_feed();
  void track_corrupt_confirmations();
  void announce(const BlockHeader& header, bool corrupted_only);
  void route_outbox(std::size_t adapter);
  const BlockTree& view_of(PeerId peer) const;

  SimParams params_;
  std::mt19937_64 rng_;
  SimTime origin_{0};
  SimTime now_{0};
  std::uint64_t seq_ = 0;
  std::vector<Event> queue_;
  ChainParams chain_;

  // Honest chain view shared by every honest miner and peer.
  BlockTree honest_;
  // Honest blocks plus the adversary blocks published so far.
  BlockTree published_;
  // Honest blocks plus every adversary block.
  BlockTree adversary_view_;
  std::unordered_map<Hash256, Block, Hash256Hasher> blocks_;
  std::unordered_set<Hash256, Hash256Hasher> adversary_blocks_;
  std::vector<Transaction> mempool_;
  std::unordered_set<Hash256, Hash256Hasher> seen_txs_;
  std::vector<Spendable> spendable_;
  std::uint32_t matured_height_ = 0;

  std::vector<bool> corrupted_;
  std::vector<std::string> addresses_;
  std::vector<Bytes> scripts_;
  std::string adversary_address_;
  Bytes adversary_script_;

  std::unique_ptr<Canister> canister_;
  std::vector<Adapter> adapters_;
  std::vector<std::unique_ptr<Directory>> directories_;

  bool mining_ = true;
  std::uint64_t mine_epoch_ = 0;
  bool downtime_ = false;
  bool attack_active_ = false;
  std::optional<Transaction> corrupting_tx_;
  Hash256 fork_base_;
  std::vector<Hash256> fork_;  // current adversary fork, base excluded
  std::size_t released_ = 0;
  std::unordered_set<Hash256, Hash256Hasher> corrupt_blocks_;
  std::int64_t corrupt_max_conf_ = 0;
  std::uint64_t budget_blocked_ = 0;
  std::uint64_t fork_restarts_ = 0;

  std::uint64_t rounds_ = 0;
  std::uint64_t malicious_rounds_ = 0;
  std::uint64_t fed_blocks_ = 0;
  std::uint64_t honest_mined_ = 0;
  std::uint64_t adversary_mined_ = 0;
  Hash256 last_anchor_;
  std::uint64_t last_reorgs_ = 0;

  std::vector<Observation> log_;
};

}  // namespace btcsync::netsim
