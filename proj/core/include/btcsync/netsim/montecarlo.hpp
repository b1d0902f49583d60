#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "btcsync/messages.hpp"
#include "btcsync/netsim/params.hpp"

namespace btcsync::netsim {

/// `ell` distinct peers drawn uniformly without replacement from
/// [0, population). Throws std::invalid_argument when ell > population.
std::vector<PeerId> sample_adapter_peers(std::size_t population, std::size_t ell,
                                         std::mt19937_64& rng);

struct EclipseEstimate {
  /// All ell peers of a given adapter corrupted; pooled over the n adapters.
  double per_adapter = 0.0;
  /// At least one of the n adapters eclipsed.
  double any_adapter = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t adapter_samples = 0;
};

/// Each trial samples peers for n adapters from a population in which the
/// first floor(phi * population) ids are corrupted.
EclipseEstimate run_eclipse_trial(const SimParams& params, std::uint64_t trials,
                                  std::uint64_t seed);

struct DowntimeEstimate {
  double success = 0.0;
  std::uint64_t trials = 0;
};

/// After a downtime the attack succeeds iff the first c_star block makers
/// are all malicious; an honest maker reveals the honest headers.
DowntimeEstimate run_downtime_attack(const SimParams& params, std::uint64_t trials,
                                     std::uint64_t seed);

struct ForkAttackResult {
  std::int64_t max_confirmations = 0;
  std::uint64_t runs_reaching_c_star = 0;
  std::vector<std::int64_t> per_run;
};

/// Full simulations with the withhold-and-release adversary active from
/// `attack_after` until `duration`; records the largest confirmation count
/// the canister reports for the corrupting transaction in each run.
ForkAttackResult run_fork_attack(const SimParams& params, std::uint64_t trials,
                                 std::uint64_t seed, SimTime attack_after, SimTime duration);

double analytic_eclipse_per_adapter(double phi, std::size_t ell);
double analytic_eclipse_any(double phi, std::size_t ell, std::size_t n);
double analytic_downtime_success(std::size_t f, std::size_t n, std::uint64_t c_star);

}  // namespace btcsync::netsim
