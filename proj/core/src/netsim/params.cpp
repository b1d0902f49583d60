#include "btcsync/netsim/params.hpp"

#include <stdexcept>
#include <string>

namespace btcsync::netsim {

std::string_view to_string(AdversaryStrategy s) {
  switch (s) {
    case AdversaryStrategy::kNone: return "none";
    case AdversaryStrategy::kWithholdAndRelease: return "withhold-and-release";
    case AdversaryStrategy::kFeedDuringDowntime: return "feed-during-downtime";
  }
  return "none";
}

std::optional<AdversaryStrategy> parse_strategy(std::string_view name) {
  std::string norm(name);
  for (auto& c : norm) {
    if (c == '_') c = '-';
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  for (auto s : {AdversaryStrategy::kNone, AdversaryStrategy::kWithholdAndRelease,
                 AdversaryStrategy::kFeedDuringDowntime}) {
    if (norm == to_string(s)) return s;
  }
  return std::nullopt;
}

void SimParams::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (n == 0) fail("n must be positive");
  if (3 * f >= n) fail("f must be below n/3");
  if (ell == 0) fail("ell must be positive");
  if (ell > population) fail("ell exceeds the peer population");
  if (!(phi >= 0.0 && phi < 1.0)) fail("phi must lie in [0, 1)");
  if (!(adversary_hash_fraction >= 0.0 && adversary_hash_fraction < 1.0))
    fail("adversary_hash_fraction must lie in [0, 1)");
  if (c_star == 0) fail("c_star must be at least 1");
  if (!(honest_block_interval > 0.0)) fail("honest_block_interval must be positive");
  if (latency_min.count() < 0 || latency_max < latency_min) fail("bad latency range");
  if (round_interval.count() <= 0 || tick_interval.count() <= 0) fail("intervals must be positive");
  if (!(honest_fork_probability >= 0.0 && honest_fork_probability <= 1.0))
    fail("honest_fork_probability must lie in [0, 1]");
  if (address_count == 0) fail("address_count must be positive");
  if (delta == 0) fail("delta must be positive");
  if (page_size == 0) fail("page_size must be positive");
}

}  // namespace btcsync::netsim
