#include "btcsync/harness/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace btcsync::harness {

namespace {

std::size_t line_of(const YAML::Node& n) {
  const auto mark = n.Mark();
  return mark.line >= 0 ? static_cast<std::size_t>(mark.line) + 1 : 0;
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) throw ScenarioError(line_of(n), key + ": expected a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ScenarioError(line_of(n), key + ": bad value '" + n.Scalar() + "'");
  }
}

SimTime seconds(double s) { return SimTime(static_cast<std::int64_t>(s * 1000.0 + 0.5)); }

void parse_params(const YAML::Node& node, netsim::SimParams& p) {
  if (!node.IsMap()) throw ScenarioError(line_of(node), "params: expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    const auto& v = kv.second;
    if (key == "n") p.n = scalar<std::size_t>(v, key);
    else if (key == "f") p.f = scalar<std::size_t>(v, key);
    else if (key == "ell") p.ell = scalar<std::size_t>(v, key);
    else if (key == "phi") p.phi = scalar<double>(v, key);
    else if (key == "population") p.population = scalar<std::size_t>(v, key);
    else if (key == "block_interval") p.honest_block_interval = scalar<double>(v, key);
    else if (key == "adversary_hash") p.adversary_hash_fraction = scalar<double>(v, key);
    else if (key == "c_star") p.c_star = scalar<std::uint64_t>(v, key);
    else if (key == "budget") p.budget_enabled = scalar<bool>(v, key);
    else if (key == "strategy") {
      const auto s = netsim::parse_strategy(scalar<std::string>(v, key));
      if (!s) throw ScenarioError(line_of(v), "unknown strategy '" + v.Scalar() + "'");
      p.strategy = *s;
    } else if (key == "latency_ms") {
      if (!v.IsSequence() || v.size() != 2)
        throw ScenarioError(line_of(v), "latency_ms: expected [min, max]");
      p.latency_min = SimTime(scalar<std::int64_t>(v[0], key));
      p.latency_max = SimTime(scalar<std::int64_t>(v[1], key));
    } else if (key == "round_interval") p.round_interval = seconds(scalar<double>(v, key));
    else if (key == "tick_interval") p.tick_interval = seconds(scalar<double>(v, key));
    else if (key == "fork_probability") p.honest_fork_probability = scalar<double>(v, key);
    else if (key == "addresses") p.address_count = scalar<std::size_t>(v, key);
    else if (key == "spends_per_block") p.max_spends_per_block = scalar<std::size_t>(v, key);
    else if (key == "delta") p.delta = scalar<std::uint64_t>(v, key);
    else if (key == "tau") p.tau = scalar<std::uint64_t>(v, key);
    else if (key == "page_size") p.page_size = scalar<std::size_t>(v, key);
    else if (key == "checkpoint_height") p.checkpoint_height = scalar<std::uint32_t>(v, key);
    else if (key == "rule") {
      const auto r = scalar<std::string>(v, key);
      if (r == "full") p.rule = StabilityRule::kFullDefinition;
      else if (r == "ratio") p.rule = StabilityRule::kRatioOnly;
      else throw ScenarioError(line_of(v), "rule: expected full or ratio");
    } else {
      throw ScenarioError(line_of(kv.first), "unknown parameter '" + key + "'");
    }
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(line_of(node), e.what());
  }
}

std::vector<std::string> words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::uint64_t to_uint(const std::string& s, const std::string& what) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw ScenarioError(0, what + ": expected a non-negative integer, got '" + s + "'");
  return std::stoull(s);
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ScenarioError(0, what + ": expected a number, got '" + s + "'");
}

/// Splits trailing `key=value` options.
std::map<std::string, std::string> options(const std::vector<std::string>& w, std::size_t from) {
  std::map<std::string, std::string> out;
  for (auto i = from; i < w.size(); ++i) {
    const auto eq = w[i].find('=');
    if (eq == std::string::npos || eq == 0) throw ScenarioError(0, "expected key=value, got '" + w[i] + "'");
    out[w[i].substr(0, eq)] = w[i].substr(eq + 1);
  }
  return out;
}

}  // namespace

const std::vector<std::string>& known_metrics() {
  static const std::vector<std::string> names = {
      // simulation
      "sim_seconds", "honest_height", "honest_blocks_mined", "adversary_height",
      "adversary_blocks_mined", "adversary_budget_blocked", "fork_restarts",
      "canister_anchor_height", "canister_tip_height", "canister_header_height",
      "canister_synced", "canister_utxos", "canister_tree_size", "blocks_ingested", "reorgs",
      "anomalies", "deep_fork_events", "rounds", "malicious_rounds", "fed_blocks",
      "corrupt_max_confirmations", "adapter_penalties", "adapter_min_peers", "delta", "tau",
      "c_star", "n", "f",
      // api
      "api_calls", "api_errors", "api_last_error", "api_last_count", "api_last_pages",
      "api_last_balance", "api_last_tip_height", "api_sent",
      // pagination
      "pagination_addresses", "pagination_mismatches", "pagination_max_pages",
      "pagination_balance_mismatches",
      // monte carlo
      "eclipse_per_adapter", "eclipse_any", "eclipse_per_adapter_analytic",
      "eclipse_any_analytic", "eclipse_per_adapter_rel_error", "eclipse_any_rel_error",
      "eclipse_trials", "downtime_success", "downtime_analytic", "downtime_bound",
      "downtime_rel_error", "downtime_trials", "fork_max_confirmations",
      "fork_runs_reaching_c_star", "fork_trials"};
  return names;
}

Action parse_action(const std::string& text) {
  const auto w = words(text);
  if (w.empty()) throw ScenarioError(0, "empty action");
  const auto& verb = w[0];
  auto arity = [&](std::size_t n) {
    if (w.size() != n) throw ScenarioError(0, "'" + verb + "' expects " + std::to_string(n - 1) + " argument(s)");
  };

  if (verb == "mining") {
    arity(2);
    if (w[1] != "start" && w[1] != "stop") throw ScenarioError(0, "mining: expected start or stop");
    return action::Mining{w[1] == "start"};
  }
  if (verb == "attack") {
    arity(2);
    if (w[1] != "start") throw ScenarioError(0, "attack: expected start");
    return action::Attack{};
  }
  if (verb == "downtime") {
    arity(2);
    if (w[1] != "start" && w[1] != "stop") throw ScenarioError(0, "downtime: expected start or stop");
    return action::Downtime{w[1] == "start"};
  }
  if (verb == "inject-fork") {
    arity(3);
    return action::InjectFork{static_cast<std::uint32_t>(to_uint(w[1], "inject-fork depth")),
                              static_cast<std::uint32_t>(to_uint(w[2], "inject-fork length"))};
  }
  if (verb == "api") {
    if (w.size() < 2) throw ScenarioError(0, "api: missing method");
    action::Api a{w[1], "", std::nullopt};
    if (a.method == "get_utxos" || a.method == "get_balance") {
      if (w.size() < 3) throw ScenarioError(0, "api " + a.method + ": missing address");
      a.address = w[2];
      for (const auto& [k, v] : options(w, 3)) {
        if (k != "min_conf") throw ScenarioError(0, "api: unknown option '" + k + "'");
        a.min_confirmations = to_uint(v, "min_conf");
      }
    } else if (a.method == "send_transaction") {
      if (w.size() != 3) throw ScenarioError(0, "api send_transaction: expected a payer address");
      a.address = w[2];
    } else {
      throw ScenarioError(0, "api: unknown method '" + a.method + "'");
    }
    return a;
  }
  if (verb == "check-pagination") {
    arity(2);
    return action::CheckPagination{w[1]};
  }
  if (verb == "montecarlo") {
    if (w.size() < 2) throw ScenarioError(0, "montecarlo: missing experiment");
    action::MonteCarlo m;
    m.experiment = w[1];
    if (m.experiment != "eclipse" && m.experiment != "downtime" && m.experiment != "fork")
      throw ScenarioError(0, "montecarlo: unknown experiment '" + m.experiment + "'");
    for (const auto& [k, v] : options(w, 2)) {
      if (k == "trials") m.trials = to_uint(v, "trials");
      else if (k == "attack_after") m.attack_after = to_double(v, "attack_after");
      else if (k == "duration") m.duration = to_double(v, "duration");
      else throw ScenarioError(0, "montecarlo: unknown option '" + k + "'");
    }
    if (m.trials == 0) throw ScenarioError(0, "montecarlo: trials must be at least 1");
    return m;
  }
  if (verb == "snapshot") {
    arity(2);
    return action::Snapshot{w[1]};
  }
  if (verb == "assert") {
    auto rest = text.substr(text.find("assert") + 6);
    rest.erase(0, rest.find_first_not_of(" \t"));
    action::Assert a;
    try {
      a.comparison = parse_comparison(rest);
    } catch (const ExpressionError& e) {
      throw ScenarioError(0, std::string("assert: ") + e.what());
    }
    const auto& known = known_metrics();
    for (const auto& m : referenced_metrics(a.comparison)) {
      if (std::find(known.begin(), known.end(), m) == known.end())
        throw ScenarioError(0, "assert: undefined metric '" + m + "'");
    }
    return a;
  }
  throw ScenarioError(0, "unknown action '" + verb + "'");
}

Scenario parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ScenarioError(static_cast<std::size_t>(e.mark.line) + 1, e.msg);
  }
  if (!root.IsMap()) throw ScenarioError(line_of(root), "scenario must be a mapping");

  Scenario s;
  bool have_name = false;
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    const auto& v = kv.second;
    if (key == "name") {
      s.name = scalar<std::string>(v, key);
      have_name = true;
    } else if (key == "seed") {
      s.seed = scalar<std::uint64_t>(v, key);
    } else if (key == "duration") {
      s.duration = scalar<double>(v, key);
    } else if (key == "params") {
      parse_params(v, s.params);
    } else if (key == "script") {
      if (!v.IsSequence()) throw ScenarioError(line_of(v), "script: expected a list");
      for (const auto& item : v) {
        const auto line = line_of(item);
        if (!item.IsMap() || !item["at"] || !item["do"])
          throw ScenarioError(line, "script entry needs 'at' and 'do'");
        for (const auto& f : item) {
          const auto k = f.first.as<std::string>();
          if (k != "at" && k != "do") throw ScenarioError(line, "unknown script key '" + k + "'");
        }
        ScriptStep step;
        step.line = line_of(item["do"]);
        step.at = scalar<double>(item["at"], "at");
        step.text = scalar<std::string>(item["do"], "do");
        if (step.at < 0) throw ScenarioError(line, "'at' must not be negative");
        if (!s.script.empty() && step.at < s.script.back().at)
          throw ScenarioError(line, "script steps must be in time order");
        try {
          step.action = parse_action(step.text);
        } catch (const ScenarioError& e) {
          throw ScenarioError(step.line, e.what());
        }
        s.script.push_back(std::move(step));
      }
    } else {
      throw ScenarioError(line_of(kv.first), "unknown key '" + key + "'");
    }
  }
  if (!have_name) throw ScenarioError(line_of(root), "scenario has no name");
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(0, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace btcsync::harness
