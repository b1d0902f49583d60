#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "btcsync/canister.hpp"
#include "btcsync/harness/inspect.hpp"
#include "btcsync/harness/runner.hpp"
#include "btcsync/harness/scenario.hpp"
#include "btcsync/netsim/montecarlo.hpp"
#include "btcsync/serialize.hpp"

namespace fs = std::filesystem;
using namespace btcsync;

namespace {

constexpr int kOk = 0;
constexpr int kAssertionFailed = 1;
constexpr int kUsage = 2;

struct RunArgs {
  std::string scenario;
  std::string out = "out";
  std::optional<std::uint64_t> seed, delta, tau, trials;
  std::optional<std::size_t> page_size;
};

struct MonteCarloArgs {
  std::string experiment;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  std::size_t n = 13, f = 4, ell = 5, population = 10000;
  double phi = 0.3;
  std::uint64_t c_star = 3;
  std::string out;
};

struct InspectArgs {
  std::string dump;
  std::uint64_t delta = 1;
  std::string kind = "confirmation";
};

struct ApiArgs {
  std::string snapshot;
  std::string method;
  std::string argument;
  std::string network = "regtest";
  std::optional<std::uint64_t> min_confirmations;
  std::optional<std::string> page;
  std::string out;
};

int run(const RunArgs& a) {
  harness::Scenario scenario;
  try {
    scenario = harness::load_scenario(a.scenario);
  } catch (const harness::ScenarioError& e) {
    std::cerr << a.scenario << ": " << e.what() << '\n';
    return kUsage;
  }
  harness::RunOptions opts{a.seed, a.delta, a.tau, a.page_size, a.trials};
  harness::RunResult result;
  try {
    result = harness::run_scenario(scenario, opts);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid parameters: " << e.what() << '\n';
    return kUsage;
  }

  fs::create_directories(a.out);
  {
    std::ofstream report(fs::path(a.out) / "report.csv");
    harness::write_report_csv(report, result);
    std::ofstream log(fs::path(a.out) / "observations.csv");
    netsim::write_observations_csv(log, result.observations, result.origin);
    for (const auto& [name, text] : result.snapshots)
      std::ofstream(fs::path(a.out) / (name + ".snapshot")) << text;
  }

  std::size_t failed = 0;
  for (const auto& o : result.assertions) {
    if (o.passed) continue;
    ++failed;
    std::cerr << a.scenario << ":" << o.line << ": assertion failed: " << o.text;
    if (!o.error.empty()) {
      std::cerr << " (" << o.error << ")\n";
    } else {
      std::cerr << " (lhs=" << harness::format_number(o.lhs)
                << ", rhs=" << harness::format_number(o.rhs) << ")\n";
    }
  }
  std::cout << result.scenario << ": " << result.assertions.size() - failed << "/"
            << result.assertions.size() << " assertions passed, seed " << result.seed
            << ", report in " << a.out << "\n";
  return failed ? kAssertionFailed : kOk;
}

int montecarlo(const MonteCarloArgs& a) {
  netsim::SimParams p;
  p.n = a.n;
  p.f = a.f;
  p.ell = a.ell;
  p.phi = a.phi;
  p.population = a.population;
  p.c_star = a.c_star;
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid parameters: " << e.what() << '\n';
    return kUsage;
  }

  double estimate = 0.0, analytic = 0.0;
  std::string metric;
  if (a.experiment == "eclipse") {
    const auto e = netsim::run_eclipse_trial(p, a.trials, a.seed);
    estimate = e.any_adapter;
    analytic = netsim::analytic_eclipse_any(p.phi, p.ell, p.n);
    const auto per = netsim::analytic_eclipse_per_adapter(p.phi, p.ell);
    std::cout << "per-adapter estimate " << harness::format_number(e.per_adapter)
              << " analytic " << harness::format_number(per) << "\n";
    metric = "eclipse_any";
  } else {
    estimate = netsim::run_downtime_attack(p, a.trials, a.seed).success;
    analytic = netsim::analytic_downtime_success(p.f, p.n, p.c_star);
    metric = "downtime_success";
  }
  const double rel = analytic > 0 ? std::abs(estimate - analytic) / analytic : 0.0;
  std::cout << metric << " estimate " << harness::format_number(estimate) << " analytic "
            << harness::format_number(analytic) << " relative error "
            << harness::format_number(rel) << " trials " << a.trials << " seed " << a.seed
            << "\n";
  if (!a.out.empty()) {
    const bool fresh = !fs::exists(a.out);
    std::ofstream csv(a.out, std::ios::app);
    if (fresh) csv << "experiment,estimate,analytic,relative_error,trials,seed\n";
    csv << a.experiment << ',' << harness::format_number(estimate) << ','
        << harness::format_number(analytic) << ',' << harness::format_number(rel) << ','
        << a.trials << ',' << a.seed << '\n';
  }
  return kOk;
}

int inspect(const InspectArgs& a) {
  const auto kind = harness::parse_depth_kind(a.kind);
  if (!kind) {
    std::cerr << "unknown depth kind '" << a.kind << "'\n";
    return kUsage;
  }
  std::ifstream in(a.dump);
  if (!in) {
    std::cerr << "cannot open " << a.dump << '\n';
    return kUsage;
  }
  try {
    const auto tree = BlockTree::from_dump(in);
    harness::print_stability_table(tree, a.delta, *kind, std::cout);
  } catch (const TreeFormatError& e) {
    std::cerr << a.dump << ": " << e.what() << '\n';
    return kUsage;
  }
  return kOk;
}

void print_utxos(const UtxosPage& page) {
  std::cout << "tip " << page.tip_hash.to_hex() << " " << page.tip_height << "\n";
  for (const auto& u : page.utxos) {
    std::cout << u.outpoint.txid.to_hex() << ":" << u.outpoint.vout << " " << u.value << " "
              << u.height << "\n";
  }
  if (page.next_page) std::cout << "next_page " << *page.next_page << "\n";
}

int api(const ApiArgs& a) {
  std::ifstream in(a.snapshot);
  if (!in) {
    std::cerr << "cannot open " << a.snapshot << '\n';
    return kUsage;
  }
  const auto network = parse_network(a.network);
  if (!network) {
    std::cerr << "unknown network '" << a.network << "'\n";
    return kUsage;
  }
  std::optional<Canister> canister;
  try {
    canister.emplace(Canister::load(in));
  } catch (const std::exception& e) {
    std::cerr << a.snapshot << ": " << e.what() << '\n';
    return kUsage;
  }

  auto fail = [](ApiError e) {
    std::cout << "error " << to_string(e) << "\n";
    return kAssertionFailed;
  };
  if (a.method == "get_utxos") {
    std::optional<UtxosFilter> filter;
    if (a.page) filter = PageToken{*a.page};
    else if (a.min_confirmations) filter = MinConfirmations{*a.min_confirmations};
    auto r = canister->get_utxos(a.argument, *network, filter);
    if (!r) return fail(r.error());
    print_utxos(r.value());
  } else if (a.method == "get_balance") {
    auto r = canister->get_balance(a.argument, *network, a.min_confirmations);
    if (!r) return fail(r.error());
    std::cout << r.value() << "\n";
  } else if (a.method == "send_transaction") {
    Bytes raw;
    try {
      raw = from_hex(a.argument);
    } catch (const std::exception&) {
      return fail(ApiError::kMalformedTransaction);
    }
    auto r = canister->send_transaction(raw, *network);
    if (!r) return fail(r.error());
    std::cout << r.value().to_hex() << "\n";
    if (!a.out.empty()) {
      std::ofstream out(a.out);
      canister->save(out);
    }
  } else {
    std::cerr << "unknown method '" << a.method << "'\n";
    return kUsage;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bitcoin header-tree synchronization simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario file");
  run_cmd->add_option("scenario", run_args.scenario, "Scenario YAML")->required();
  run_cmd->add_option("--seed", run_args.seed, "Override the scenario seed");
  run_cmd->add_option("--out", run_args.out, "Output directory")->capture_default_str();
  run_cmd->add_option("--delta", run_args.delta, "Stability threshold")->check(CLI::PositiveNumber);
  run_cmd->add_option("--tau", run_args.tau, "Sync tolerance");
  run_cmd->add_option("--page-size", run_args.page_size, "UTXO page size")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--trials", run_args.trials, "Override montecarlo trial counts")
      ->check(CLI::PositiveNumber);

  MonteCarloArgs mc_args;
  auto* mc_cmd = app.add_subcommand("montecarlo", "Estimate an attack probability");
  mc_cmd->add_option("experiment", mc_args.experiment, "eclipse or downtime")
      ->required()
      ->check(CLI::IsMember({"eclipse", "downtime"}));
  mc_cmd->add_option("--trials", mc_args.trials, "Number of trials")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  mc_cmd->add_option("--seed", mc_args.seed, "Seed")->capture_default_str();
  mc_cmd->add_option("--n", mc_args.n, "Subnet size")->capture_default_str();
  mc_cmd->add_option("--f", mc_args.f, "Malicious subnet nodes")->capture_default_str();
  mc_cmd->add_option("--ell", mc_args.ell, "Peers per adapter")->capture_default_str();
  mc_cmd->add_option("--phi", mc_args.phi, "Corrupted peer fraction")->capture_default_str();
  mc_cmd->add_option("--population", mc_args.population, "Peer population")
      ->capture_default_str();
  mc_cmd->add_option("--c-star", mc_args.c_star, "Confirmations required")->capture_default_str();
  mc_cmd->add_option("--out", mc_args.out, "Append a CSV row to this file");

  InspectArgs inspect_args;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print per-block stability of a tree dump");
  inspect_cmd->add_option("dump", inspect_args.dump, "Tree dump")->required();
  inspect_cmd->add_option("--delta", inspect_args.delta, "Threshold")->capture_default_str();
  inspect_cmd->add_option("--kind", inspect_args.kind, "confirmation or work")
      ->capture_default_str();

  ApiArgs api_args;
  auto* api_cmd = app.add_subcommand("api", "Call the canister API against a snapshot");
  api_cmd->add_option("snapshot", api_args.snapshot, "Canister snapshot")->required();
  api_cmd->add_option("method", api_args.method, "get_utxos, get_balance or send_transaction")
      ->required();
  api_cmd->add_option("argument", api_args.argument, "Address or raw transaction hex")
      ->required();
  api_cmd->add_option("--network", api_args.network, "Network of the request")
      ->capture_default_str();
  api_cmd->add_option("--min-confirmations", api_args.min_confirmations, "Confirmation filter");
  api_cmd->add_option("--page", api_args.page, "Continuation token");
  api_cmd->add_option("--out", api_args.out, "Write the updated snapshot here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*run_cmd) return run(run_args);
  if (*mc_cmd) return montecarlo(mc_args);
  if (*inspect_cmd) return inspect(inspect_args);
  return api(api_args);
}
