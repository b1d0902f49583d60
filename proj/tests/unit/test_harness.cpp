#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "btcsync/harness/expression.hpp"
#include "btcsync/harness/inspect.hpp"
#include "btcsync/harness/runner.hpp"
#include "btcsync/harness/scenario.hpp"

using namespace btcsync;
using namespace btcsync::harness;

namespace {

std::size_t error_line(const std::string& yaml) {
  try {
    (void)parse_scenario(yaml);
  } catch (const ScenarioError& e) {
    return e.line();
  }
  FAIL("expected ScenarioError");
  return 0;
}

}  // namespace

TEST_CASE("expressions") {
  const std::map<std::string, double> m{{"tip", 10}, {"delta", 6}, {"a", 0.5}};
  const auto c = parse_comparison("anchor_height == tip - delta + 1");
  CHECK(c.op == "==");
  CHECK(referenced_metrics(c) == std::set<std::string>{"anchor_height", "tip", "delta"});
  CHECK(evaluate(c.rhs, m) == 5);
  CHECK_THROWS_AS(evaluate(c.lhs, m), ExpressionError);

  CHECK(evaluate(parse_comparison("2 * a * tip - 3 < 0").lhs, m) == 7);
  CHECK(evaluate(parse_comparison("-tip + 1e1 >= 0").lhs, m) == 0);
  for (const auto* op : {"==", "!=", "<", "<=", ">", ">="}) {
    const auto cmp = parse_comparison(std::string("1 ") + op + " 2");
    CHECK(holds(cmp, 1, 2) == (std::string(op) == "!=" || std::string(op) == "<" ||
                               std::string(op) == "<="));
  }
  CHECK_THROWS_AS(parse_comparison("tip"), ExpressionError);
  CHECK_THROWS_AS(parse_comparison("tip < 1 < 2"), ExpressionError);
  CHECK_THROWS_AS(parse_comparison("tip + < 2"), ExpressionError);
  CHECK_THROWS_AS(parse_comparison("tip $ 2"), ExpressionError);
}

TEST_CASE("actions") {
  CHECK(std::holds_alternative<action::Mining>(parse_action("mining stop")));
  CHECK_FALSE(std::get<action::Mining>(parse_action("mining stop")).on);
  const auto f = std::get<action::InjectFork>(parse_action("inject-fork 3 5"));
  CHECK(f.depth == 3);
  CHECK(f.length == 5);
  const auto api = std::get<action::Api>(parse_action("api get_utxos addr:4 min_conf=2"));
  CHECK(api.address == "addr:4");
  CHECK(api.min_confirmations == 2u);
  const auto mc = std::get<action::MonteCarlo>(parse_action("montecarlo fork trials=7 duration=100"));
  CHECK(mc.trials == 7);
  CHECK(mc.duration == 100.0);
  CHECK(std::get<action::Assert>(parse_action("assert reorgs >= 1")).comparison.text == "reorgs >= 1");
  CHECK_THROWS_AS(parse_action("assert no_such_metric > 1"), ScenarioError);
  CHECK_THROWS_AS(parse_action("fly away"), ScenarioError);
  CHECK_THROWS_AS(parse_action("inject-fork 3"), ScenarioError);
  CHECK_THROWS_AS(parse_action("inject-fork x 3"), ScenarioError);
  CHECK_THROWS_AS(parse_action("montecarlo weather"), ScenarioError);
  CHECK_THROWS_AS(parse_action("api get_utxos addr:1 depth=2"), ScenarioError);
}

TEST_CASE("scenario parse errors carry line numbers") {
  CHECK(error_line("name: x\nparams:\n  n: 4\n  bogus: 1\n") == 4);
  CHECK(error_line("name: x\nscript:\n  - at: 10\n    do: mining stop\n  - at: 5\n    do: mining start\n") == 5);
  CHECK(error_line("name: x\nscript:\n  - at: 1\n    do: assert nothing_here == 1\n") == 4);
  CHECK(error_line("name: x\nparams:\n  n: four\n") == 3);
  CHECK(error_line("name: x\nparams:\n  strategy: sneaky\n") == 3);
  CHECK(error_line("seed: 3\n") != 0);
  CHECK_THROWS_AS(parse_scenario("name: [unclosed\n"), ScenarioError);
  CHECK_THROWS_AS(parse_scenario("name: x\nparams:\n  n: 3\n  f: 1\n"), ScenarioError);
}

TEST_CASE("scenario fields") {
  const auto s = parse_scenario(
      "name: demo\nseed: 9\nduration: 120\nparams:\n  n: 4\n  f: 1\n  population: 20\n"
      "  ell: 3\n  latency_ms: [10, 20]\n  rule: ratio\n"
      "script:\n  - at: 60\n    do: snapshot mid\n");
  CHECK(s.name == "demo");
  CHECK(s.seed == 9);
  CHECK(s.duration == 120.0);
  CHECK(s.params.n == 4);
  CHECK(s.params.latency_max == std::chrono::milliseconds(20));
  CHECK(s.params.rule == StabilityRule::kRatioOnly);
  REQUIRE(s.script.size() == 1);
  CHECK(s.script[0].line == 13);
}

TEST_CASE("known metrics cover the world") {
  netsim::SimParams p;
  p.n = 4;
  p.f = 1;
  p.ell = 3;
  p.population = 20;
  netsim::World w(p, 1);
  const auto& known = known_metrics();
  for (const auto& [name, v] : w.metrics()) {
    CAPTURE(name);
    CHECK(std::find(known.begin(), known.end(), name) != known.end());
  }
}

TEST_CASE("run a small scenario") {
  const auto s = parse_scenario(
      "name: small\nseed: 4\nduration: 1500\nparams:\n  n: 4\n  f: 1\n  population: 20\n"
      "  ell: 3\n  block_interval: 60\n  round_interval: 5\n  delta: 4\n  page_size: 2\n"
      "script:\n"
      "  - at: 1200\n    do: mining stop\n"
      "  - at: 1500\n    do: check-pagination all\n"
      "  - at: 1500\n    do: assert pagination_mismatches == 0\n"
      "  - at: 1500\n    do: api get_balance addr:0 min_conf=5\n"
      "  - at: 1500\n    do: assert api_last_error == 2\n"
      "  - at: 1500\n    do: assert honest_height < 0\n"
      "  - at: 1500\n    do: snapshot end\n");
  const auto r = run_scenario(s);
  REQUIRE(r.assertions.size() == 3);
  CHECK(r.assertions[0].passed);
  CHECK(r.assertions[1].passed);
  CHECK_FALSE(r.assertions[2].passed);
  CHECK(r.assertions[2].line == 25);
  CHECK_FALSE(r.ok());
  CHECK(r.snapshots.contains("end"));
  CHECK(r.metrics.at("sim_seconds") == 1500);

  std::ostringstream report;
  write_report_csv(report, r);
  CHECK(report.str().rfind("metric,value,trials,seed\n", 0) == 0);
  CHECK(report.str().find("\nreorgs,0,1,4\n") != std::string::npos);

  RunOptions o;
  o.delta = 5;
  CHECK(run_scenario(s, o).metrics.at("delta") == 5);
  o.delta = std::nullopt;
  o.seed = 99;
  CHECK(run_scenario(s, o).seed == 99);
}

TEST_CASE("number formatting") {
  CHECK(format_number(3) == "3");
  CHECK(format_number(-1) == "-1");
  CHECK(format_number(0.25) == "0.25");
  CHECK(format_number(1.0 / 3) == "0.3333333333");
}

TEST_CASE("stability table for the two-fork fixture") {
  std::ifstream in(std::string(BTCSYNC_FIXTURE_DIR) + "/two_fork.tree");
  const auto tree = BlockTree::from_dump(in);
  std::ostringstream out;
  print_stability_table(tree, 2, DepthKind::kConfirmation, out);
  const auto text = out.str();
  CHECK(text.find("0202020202") != std::string::npos);
  std::istringstream lines(text);
  std::string line;
  std::map<std::string, std::string> rows;
  std::getline(lines, line);  // header
  while (std::getline(lines, line)) rows[line.substr(0, 4)] = line;
  std::istringstream a1(rows.at("0202"));
  std::string hash, height, depth, stab, stable, current;
  a1 >> hash >> height >> depth >> stab >> stable >> current;
  CHECK(height == "1");
  CHECK(depth == "3");
  CHECK(stab == "2");
  CHECK(stable == "yes");
  CHECK(current == "*");
  std::istringstream b1(rows.at("0505"));
  current.clear();
  b1 >> hash >> height >> depth >> stab >> stable >> current;
  CHECK(stab == "-2");
  CHECK(stable == "no");
  CHECK(current.empty());

  StabilityScore s{WorkDelta(6), Uint256(4)};
  CHECK(format_stability(s) == "3/2");
  CHECK(parse_depth_kind("work") == DepthKind::kWork);
  CHECK_FALSE(parse_depth_kind("weight"));
}
