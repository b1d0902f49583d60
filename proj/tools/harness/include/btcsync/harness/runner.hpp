#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "btcsync/harness/scenario.hpp"
#include "btcsync/netsim/world.hpp"

namespace btcsync::harness {

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> delta;
  std::optional<std::uint64_t> tau;
  std::optional<std::size_t> page_size;
  /// Overrides the trial count of every montecarlo step.
  std::optional<std::uint64_t> trials;
};

struct AssertionOutcome {
  std::size_t line = 0;
  std::string text;
  bool passed = false;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string error;
};

struct RunResult {
  std::string scenario;
  std::uint64_t seed = 0;
  std::map<std::string, double> metrics;
  /// Trial count behind a metric; absent means a single run.
  std::map<std::string, std::uint64_t> trials;
  std::vector<AssertionOutcome> assertions;
  std::vector<netsim::Observation> observations;
  SimTime origin{0};
  std::map<std::string, std::string> snapshots;

  bool ok() const;
};

/// Applies option overrides to the scenario parameters.
netsim::SimParams effective_params(const Scenario& scenario, const RunOptions& options);

RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// `metric,value,trials,seed`, metrics in name order.
void write_report_csv(std::ostream& out, const RunResult& result);

/// Resolves `addr:<i>`, `adversary` or a literal address.
std::string resolve_address(const netsim::World& world, const std::string& ref);

/// UTXOs of `address` after replaying the chain ending at `tip` from the
/// world's block store, in API order.
std::vector<Utxo> replay_address_utxos(const netsim::World& world, const BlockTree& tree,
                                       const Hash256& tip, const std::string& address);

std::string format_number(double v);

}  // namespace btcsync::harness
