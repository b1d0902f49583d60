#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>

#include "btcsync/canister.hpp"
#include "btcsync/messages.hpp"

namespace btcsync::netsim {

enum class AdversaryStrategy {
  kNone,
  /// Mine a private fork carrying the corrupting transaction and publish it
  /// through corrupted peers once it is longer than the honest chain.
  kWithholdAndRelease,
  /// Mine from the canister's tip while it is down, then have malicious
  /// block makers feed the fork one block per round with no further headers.
  kFeedDuringDowntime,
};

std::string_view to_string(AdversaryStrategy s);
std::optional<AdversaryStrategy> parse_strategy(std::string_view name);

struct SimParams {
  std::size_t n = 13;  // subnet nodes, one adapter each
  std::size_t f = 4;   // malicious subnet nodes, f < n/3
  std::size_t ell = 5;
  double phi = 0.0;  // corrupted fraction of the Bitcoin peer population
  std::size_t population = 200;

  double honest_block_interval = 600.0;  // seconds, for the full hash rate
  double adversary_hash_fraction = 0.0;
  std::uint64_t c_star = 6;
  bool budget_enabled = true;
  AdversaryStrategy strategy = AdversaryStrategy::kNone;

  SimTime latency_min = std::chrono::milliseconds(50);
  SimTime latency_max = std::chrono::seconds(2);
  SimTime round_interval = std::chrono::seconds(2);
  SimTime tick_interval = std::chrono::seconds(30);

  /// Chance that an honest block extends the tip's parent instead of the tip.
  double honest_fork_probability = 0.0;
  std::size_t address_count = 32;
  std::size_t max_spends_per_block = 4;

  std::uint64_t delta = 6;
  std::uint64_t tau = 2;
  std::size_t page_size = 1000;
  StabilityRule rule = StabilityRule::kFullDefinition;
  std::uint32_t checkpoint_height = std::numeric_limits<std::uint32_t>::max();

  /// Throws std::invalid_argument.
  void validate() const;
};

}  // namespace btcsync::netsim
