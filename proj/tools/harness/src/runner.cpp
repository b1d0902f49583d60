#include "btcsync/harness/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "btcsync/address.hpp"
#include "btcsync/netsim/montecarlo.hpp"
#include "btcsync/serialize.hpp"

namespace btcsync::harness {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kNoFunds = 100;
constexpr std::size_t kMaxPages = 1'000'000;

SimTime seconds(double s) { return SimTime(static_cast<std::int64_t>(s * 1000.0 + 0.5)); }

struct ReplayedOutput {
  Utxo utxo;
  std::string address;
};

std::map<OutPoint, ReplayedOutput> replay(const netsim::World& world, const BlockTree& tree,
                                          const Hash256& tip) {
  std::vector<Hash256> path;
  for (const TreeNode* n = &tree.node(tip);; n = &tree.node(*n->parent)) {
    path.push_back(n->hash);
    if (!n->parent) break;
  }
  std::map<OutPoint, ReplayedOutput> live;
  std::uint32_t height = 0;
  for (auto it = path.rbegin(); it != path.rend(); ++it, ++height) {
    const Block* block = world.find_block(*it);
    if (!block) throw std::runtime_error("block " + it->to_hex() + " missing from the world");
    for (const auto& tx : block->transactions) {
      if (!tx.is_coinbase())
        for (const auto& in : tx.inputs) live.erase(in.prevout);
      const auto txid = tx.txid();
      for (std::uint32_t i = 0; i < tx.outputs.size(); ++i) {
        const OutPoint op{txid, i};
        live[op] = ReplayedOutput{Utxo{op, tx.outputs[i].value, height},
                                  address_of_script(tx.outputs[i].script_pubkey,
                                                    NetworkKind::kRegtest)};
      }
    }
  }
  return live;
}

std::vector<Utxo> for_address(const std::map<OutPoint, ReplayedOutput>& live,
                              const std::string& address) {
  std::vector<Utxo> out;
  for (const auto& [op, r] : live)
    if (r.address == address) out.push_back(r.utxo);
  std::sort(out.begin(), out.end(), UtxoOrder{});
  return out;
}

class Runner {
 public:
  Runner(const Scenario& s, const RunOptions& o)
      : scenario_(s),
        options_(o),
        params_(effective_params(s, o)),
        seed_(o.seed.value_or(s.seed)),
        world_(params_, seed_) {
    for (const auto* name : {"api_calls", "api_errors", "api_last_count", "api_last_pages",
                             "api_last_balance", "api_last_tip_height", "api_sent",
                             "pagination_addresses", "pagination_mismatches",
                             "pagination_max_pages", "pagination_balance_mismatches"})
      extra_[name] = 0;
    extra_["api_last_error"] = -1;
  }

  RunResult run() {
    RunResult r;
    r.scenario = scenario_.name;
    r.seed = seed_;
    for (const auto& step : scenario_.script) {
      world_.run_until(world_.origin() + seconds(step.at));
      apply(step, r);
    }
    if (scenario_.duration) {
      const auto end = world_.origin() + seconds(*scenario_.duration);
      if (end > world_.now()) world_.run_until(end);
    }
    r.metrics = metrics();
    r.trials = trials_;
    r.observations = world_.observations();
    r.origin = world_.origin();
    r.snapshots = std::move(snapshots_);
    return r;
  }

 private:
  std::map<std::string, double> metrics() const {
    auto m = world_.metrics();
    for (const auto& [k, v] : extra_) m[k] = v;
    return m;
  }

  void apply(const ScriptStep& step, RunResult& r) {
    std::visit(Overloaded{
                   [&](const action::Mining& a) { world_.set_mining(a.on); },
                   [&](const action::Attack&) { world_.start_attack(); },
                   [&](const action::Downtime& a) {
                     a.start ? world_.start_downtime() : world_.stop_downtime();
                   },
                   [&](const action::InjectFork& a) { world_.inject_fork(a.depth, a.length); },
                   [&](const action::Api& a) { api(a); },
                   [&](const action::CheckPagination& a) { check_pagination(a); },
                   [&](const action::MonteCarlo& a) { montecarlo(a); },
                   [&](const action::Snapshot& a) {
                     std::ostringstream out;
                     world_.canister().save(out);
                     snapshots_[a.name] = out.str();
                     world_.observe("snapshot", a.name,
                                    "anchor=" + std::to_string(world_.canister().anchor_height()));
                   },
                   [&](const action::Assert& a) { check(step, a, r); },
               },
               step.action);
  }

  void record_error(ApiError e) {
    extra_["api_errors"] += 1;
    extra_["api_last_error"] = static_cast<double>(e);
  }

  void api(const action::Api& a) {
    extra_["api_calls"] += 1;
    extra_["api_last_error"] = -1;
    const auto address = resolve_address(world_, a.address);
    auto& c = world_.canister();
    std::string detail;
    if (a.method == "get_utxos") {
      std::optional<UtxosFilter> filter;
      if (a.min_confirmations) filter = MinConfirmations{*a.min_confirmations};
      auto res = c.get_utxos(address, NetworkKind::kRegtest, filter);
      if (!res) {
        record_error(res.error());
        detail = std::string("error=") + std::string(to_string(res.error()));
      } else {
        extra_["api_last_count"] = static_cast<double>(res.value().utxos.size());
        extra_["api_last_tip_height"] = res.value().tip_height;
        std::size_t pages = 1;
        auto next = res.value().next_page;
        while (next && pages < kMaxPages) {
          auto more = c.get_utxos(address, NetworkKind::kRegtest, UtxosFilter{PageToken{*next}});
          if (!more) break;
          ++pages;
          next = more.value().next_page;
        }
        extra_["api_last_pages"] = static_cast<double>(pages);
        detail = "utxos=" + std::to_string(res.value().utxos.size()) +
                 " pages=" + std::to_string(pages) +
                 " tip=" + std::to_string(res.value().tip_height);
      }
    } else if (a.method == "get_balance") {
      auto res = c.get_balance(address, NetworkKind::kRegtest, a.min_confirmations);
      if (!res) {
        record_error(res.error());
        detail = std::string("error=") + std::string(to_string(res.error()));
      } else {
        extra_["api_last_balance"] = static_cast<double>(res.value());
        detail = "balance=" + std::to_string(res.value());
      }
    } else {
      detail = send(address);
    }
    world_.observe("api", a.method, a.address + " " + detail);
  }

  std::string send(const std::string& payer) {
    auto& c = world_.canister();
    auto page = c.get_utxos(payer, NetworkKind::kRegtest);
    if (!page) {
      record_error(page.error());
      return std::string("error=") + std::string(to_string(page.error()));
    }
    if (page.value().utxos.empty()) {
      extra_["api_errors"] += 1;
      extra_["api_last_error"] = kNoFunds;
      return "error=no-funds";
    }
    const auto& coin = page.value().utxos.front();
    const auto& addrs = world_.addresses();
    const auto payee = (std::find(addrs.begin(), addrs.end(), payer) - addrs.begin() + 1) %
                       static_cast<std::ptrdiff_t>(addrs.size());
    Transaction tx;
    tx.inputs = {TxIn{coin.outpoint, Bytes{0x51}, 0xffffffff}};
    tx.outputs = {TxOut{coin.value, world_.scripts()[static_cast<std::size_t>(payee)]}};
    const auto raw = serialize_transaction(tx);
    auto res = c.send_transaction(raw, NetworkKind::kRegtest);
    if (!res) {
      record_error(res.error());
      return std::string("error=") + std::string(to_string(res.error()));
    }
    extra_["api_sent"] += 1;
    return "txid=" + res.value().short_hex();
  }

  void check_pagination(const action::CheckPagination& a) {
    auto& c = world_.canister();
    std::vector<std::string> targets;
    if (a.target == "all") {
      targets = world_.addresses();
      targets.push_back(world_.adversary_address());
    } else {
      targets.push_back(resolve_address(world_, a.target));
    }
    const auto live = replay(world_, c.tree(), c.tip());
    std::size_t mismatches = 0, balance_mismatches = 0, max_pages = 0, errors = 0;
    for (const auto& address : targets) {
      std::vector<Utxo> pages;
      std::optional<std::string> token;
      std::size_t count = 0;
      bool failed = false;
      do {
        auto res = token ? c.get_utxos(address, NetworkKind::kRegtest, UtxosFilter{PageToken{*token}})
                         : c.get_utxos(address, NetworkKind::kRegtest);
        if (!res) {
          record_error(res.error());
          failed = true;
          break;
        }
        ++count;
        pages.insert(pages.end(), res.value().utxos.begin(), res.value().utxos.end());
        token = res.value().next_page;
      } while (token && count < kMaxPages);
      if (failed) {
        ++errors;
        continue;
      }
      max_pages = std::max(max_pages, count);
      if (pages != for_address(live, address)) ++mismatches;
      std::uint64_t sum = 0;
      for (const auto& u : pages) sum += u.value;
      auto bal = c.get_balance(address, NetworkKind::kRegtest);
      if (!bal || bal.value() != sum) ++balance_mismatches;
    }
    extra_["pagination_addresses"] += static_cast<double>(targets.size() - errors);
    extra_["pagination_mismatches"] += static_cast<double>(mismatches);
    extra_["pagination_balance_mismatches"] += static_cast<double>(balance_mismatches);
    extra_["pagination_max_pages"] =
        std::max(extra_["pagination_max_pages"], static_cast<double>(max_pages));
    world_.observe("check-pagination", a.target,
                   "addresses=" + std::to_string(targets.size() - errors) +
                       " mismatches=" + std::to_string(mismatches) +
                       " max_pages=" + std::to_string(max_pages));
  }

  void montecarlo(const action::MonteCarlo& a) {
    const auto trials = options_.trials.value_or(a.trials);
    std::ostringstream d;
    if (a.experiment == "eclipse") {
      const auto e = netsim::run_eclipse_trial(params_, trials, seed_);
      const auto per = netsim::analytic_eclipse_per_adapter(params_.phi, params_.ell);
      const auto any = netsim::analytic_eclipse_any(params_.phi, params_.ell, params_.n);
      put("eclipse_per_adapter", e.per_adapter, trials);
      put("eclipse_any", e.any_adapter, trials);
      put("eclipse_per_adapter_analytic", per, 0);
      put("eclipse_any_analytic", any, 0);
      put("eclipse_per_adapter_rel_error", per > 0 ? std::abs(e.per_adapter - per) / per : 0, trials);
      put("eclipse_any_rel_error", any > 0 ? std::abs(e.any_adapter - any) / any : 0, trials);
      put("eclipse_trials", static_cast<double>(trials), 0);
      d << "per_adapter=" << format_number(e.per_adapter) << " any=" << format_number(e.any_adapter);
    } else if (a.experiment == "downtime") {
      const auto e = netsim::run_downtime_attack(params_, trials, seed_);
      const auto p = netsim::analytic_downtime_success(params_.f, params_.n, params_.c_star);
      put("downtime_success", e.success, trials);
      put("downtime_analytic", p, 0);
      put("downtime_bound", std::pow(3.0, -static_cast<double>(params_.c_star)), 0);
      put("downtime_rel_error", p > 0 ? std::abs(e.success - p) / p : 0, trials);
      put("downtime_trials", static_cast<double>(trials), 0);
      d << "success=" << format_number(e.success);
    } else {
      const auto e = netsim::run_fork_attack(params_, trials, seed_, seconds(a.attack_after),
                                             seconds(a.duration));
      put("fork_max_confirmations", static_cast<double>(e.max_confirmations), trials);
      put("fork_runs_reaching_c_star", static_cast<double>(e.runs_reaching_c_star), trials);
      put("fork_trials", static_cast<double>(trials), 0);
      d << "max_confirmations=" << e.max_confirmations
        << " reaching=" << e.runs_reaching_c_star;
    }
    d << " trials=" << trials << " seed=" << seed_;
    world_.observe("montecarlo", a.experiment, d.str());
  }

  void put(const std::string& name, double value, std::uint64_t trials) {
    extra_[name] = value;
    if (trials > 0) trials_[name] = trials;
  }

  void check(const ScriptStep& step, const action::Assert& a, RunResult& r) {
    AssertionOutcome o;
    o.line = step.line;
    o.text = a.comparison.text;
    const auto m = metrics();
    try {
      o.lhs = evaluate(a.comparison.lhs, m);
      o.rhs = evaluate(a.comparison.rhs, m);
      o.passed = holds(a.comparison, o.lhs, o.rhs);
    } catch (const ExpressionError& e) {
      o.error = e.what();
    }
    world_.observe("assert", o.passed ? "pass" : "fail",
                   "lhs=" + format_number(o.lhs) + " rhs=" + format_number(o.rhs));
    r.assertions.push_back(std::move(o));
  }

  const Scenario& scenario_;
  const RunOptions& options_;
  netsim::SimParams params_;
  std::uint64_t seed_;
  netsim::World world_;
  std::map<std::string, double> extra_;
  std::map<std::string, std::uint64_t> trials_;
  std::map<std::string, std::string> snapshots_;
};

}  // namespace

bool RunResult::ok() const {
  return std::all_of(assertions.begin(), assertions.end(),
                     [](const AssertionOutcome& a) { return a.passed; });
}

netsim::SimParams effective_params(const Scenario& scenario, const RunOptions& options) {
  auto p = scenario.params;
  if (options.delta) p.delta = *options.delta;
  if (options.tau) p.tau = *options.tau;
  if (options.page_size) p.page_size = *options.page_size;
  p.validate();
  return p;
}

RunResult run_scenario(const Scenario& scenario, const RunOptions& options) {
  return Runner(scenario, options).run();
}

std::string format_number(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_report_csv(std::ostream& out, const RunResult& result) {
  out << "metric,value,trials,seed\n";
  for (const auto& [name, value] : result.metrics) {
    auto it = result.trials.find(name);
    out << name << ',' << format_number(value) << ','
        << (it == result.trials.end() ? 1 : it->second) << ',' << result.seed << '\n';
  }
}

std::string resolve_address(const netsim::World& world, const std::string& ref) {
  if (ref == "adversary") return world.adversary_address();
  if (ref.rfind("addr:", 0) == 0) {
    const auto idx = std::stoull(ref.substr(5));
    if (idx >= world.addresses().size())
      throw std::out_of_range("address index " + ref.substr(5) + " out of range");
    return world.addresses()[idx];
  }
  return ref;
}

std::vector<Utxo> replay_address_utxos(const netsim::World& world, const BlockTree& tree,
                                       const Hash256& tip, const std::string& address) {
  return for_address(replay(world, tree, tip), address);
}

}  // namespace btcsync::harness
