#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "btcsync/block_tree.hpp"
#include "btcsync/chain_params.hpp"
#include "btcsync/messages.hpp"
#include "btcsync/utxo_set.hpp"
#include "btcsync/validation.hpp"

namespace btcsync {

enum class StabilityRule {
  /// Depth ratio and separation from every same-height rival.
  kFullDefinition,
  /// Depth ratio only.
  kRatioOnly,
};

struct CanisterConfig {
  NetworkKind network = NetworkKind::kRegtest;
  std::uint64_t delta = 144;
  std::uint64_t tau = 2;
  std::size_t page_size = 1000;
  StabilityRule rule = StabilityRule::kFullDefinition;
};

enum class ApiError {
  kUnavailable,          // not synced
  kNetworkMismatch,
  kTooManyConfirmations, // min_confirmations > delta
  kInvalidFilter,        // zero confirmations
  kInvalidPage,          // undecodable continuation token
  kMalformedTransaction,
};

std::string_view to_string(ApiError e);

template <typename T>
class ApiResult {
 public:
  ApiResult(T value) : v_(std::move(value)) {}
  ApiResult(ApiError error) : v_(error) {}

  bool ok() const { return std::holds_alternative<T>(v_); }
  explicit operator bool() const { return ok(); }
  const T& value() const { return std::get<T>(v_); }
  T& value() { return std::get<T>(v_); }
  ApiError error() const { return std::get<ApiError>(v_); }

 private:
  std::variant<T, ApiError> v_;
};

struct MinConfirmations {
  std::uint64_t value = 1;
};
struct PageToken {
  std::string token;
};
using UtxosFilter = std::variant<MinConfirmations, PageToken>;

struct UtxosPage {
  std::vector<Utxo> utxos;
  Hash256 tip_hash;
  std::uint32_t tip_height = 0;
  std::optional<std::string> next_page;
};

struct ResponseOutcome {
  std::size_t blocks_accepted = 0;
  std::size_t blocks_rejected = 0;
  std::size_t headers_accepted = 0;
  std::size_t headers_rejected = 0;
  std::size_t anchor_advances = 0;
};

/// Replicated Bitcoin state: UTXO set up to the anchor, every header in a
/// tree, and full blocks above the anchor.
///
/// A block at anchor height + 1 becomes the new anchor once its work depth,
/// measured in units of the current anchor's work, reaches delta, and (under
/// kFullDefinition) exceeds every rival at that height by delta as well.
/// API calls fail while headers run more than tau ahead of available blocks.
class Canister {
 public:
  Canister(CanisterConfig config, ChainParams params, const Block& genesis);

  GetSuccessorsRequest build_request();
  ResponseOutcome handle_response(const GetSuccessorsResponse& response, SimTime now);

  ApiResult<UtxosPage> get_utxos(const std::string& address, NetworkKind network,
                                 const std::optional<UtxosFilter>& filter = std::nullopt) const;
  ApiResult<std::uint64_t> get_balance(const std::string& address, NetworkKind network,
                                       std::optional<std::uint64_t> min_confirmations =
                                           std::nullopt) const;
  ApiResult<Hash256> send_transaction(ByteSpan tx_bytes, NetworkKind network);

  const BlockTree& tree() const { return tree_; }
  const UtxoSet& utxos() const { return utxos_; }
  const Hash256& anchor() const { return anchor_; }
  std::uint32_t anchor_height() const { return tree_.node(anchor_).height; }
  bool synced() const { return synced_; }
  const CanisterConfig& config() const { return config_; }
  const ChainParams& params() const { return params_; }
  const std::deque<Bytes>& outbound() const { return outbound_; }

  std::uint64_t blocks_ingested() const { return blocks_ingested_; }
  std::uint64_t reorgs() const { return reorgs_; }
  std::uint64_t anomalies() const { return anomalies_; }
  std::uint64_t deep_fork_events() const { return deep_fork_events_; }

  /// Tip of the selected chain restricted to blocks whose bodies are held.
  Hash256 tip() const;

  /// Versioned line-oriented snapshot; load() throws TreeFormatError.
  void save(std::ostream& out) const;
  static Canister load(std::istream& in);

 private:
  struct ChainView {
    std::vector<Hash256> blocks;  // unstable blocks with bodies, anchor excluded
    Hash256 tip;
    std::uint32_t tip_height = 0;
  };

  void advance_anchor();
  bool next_is_stable(const TreeNode& candidate) const;
  void refresh_synced();
  void track_reorg();
  std::optional<ApiError> check_api(NetworkKind network) const;
  ChainView select_chain(std::optional<std::uint64_t> min_confirmations) const;
  std::vector<Utxo> collect_utxos(const std::string& address, const ChainView& view) const;

  CanisterConfig config_;
  ChainParams params_;
  BlockTree tree_;
  UtxoSet utxos_;
  Hash256 anchor_;
  std::deque<Bytes> outbound_;
  bool synced_ = true;
  Hash256 last_tip_;
  std::uint64_t blocks_ingested_ = 0;
  std::uint64_t reorgs_ = 0;
  std::uint64_t anomalies_ = 0;
  std::uint64_t deep_fork_events_ = 0;
};

}  // namespace btcsync
