#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "btcsync/harness/expression.hpp"
#include "btcsync/netsim/params.hpp"

namespace btcsync::harness {

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace action {
struct Mining {
  bool on = true;
};
struct Attack {};
struct Downtime {
  bool start = true;
};
struct InjectFork {
  std::uint32_t depth = 1;
  std::uint32_t length = 2;
};
/// Address reference: `addr:<index>`, `adversary`, or a literal address.
struct Api {
  std::string method;  // get_utxos | get_balance | send_transaction
  std::string address;
  std::optional<std::uint64_t> min_confirmations;
};
struct CheckPagination {
  std::string target;  // `all` or an address reference
};
struct MonteCarlo {
  std::string experiment;  // eclipse | downtime | fork
  std::uint64_t trials = 1000;
  double attack_after = 600.0;
  double duration = 3600.0;
};
struct Snapshot {
  std::string name;
};
struct Assert {
  Comparison comparison;
};
}  // namespace action

using Action = std::variant<action::Mining, action::Attack, action::Downtime, action::InjectFork,
                            action::Api, action::CheckPagination, action::MonteCarlo,
                            action::Snapshot, action::Assert>;

/// Throws ScenarioError (line 0) on unknown or malformed actions.
Action parse_action(const std::string& text);

struct ScriptStep {
  double at = 0.0;  // seconds since the simulation start
  std::string text;
  Action action;
  std::size_t line = 0;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 1;
  netsim::SimParams params;
  /// End of the run in seconds; may lie after the last step.
  std::optional<double> duration;
  std::vector<ScriptStep> script;
};

/// YAML scenario. Errors carry 1-based line numbers.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

/// Every name an assertion may reference.
const std::vector<std::string>& known_metrics();

}  // namespace btcsync::harness
