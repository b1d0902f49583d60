#include <benchmark/benchmark.h>

#include <random>

#include "btcsync/adapter.hpp"
#include "btcsync/canister.hpp"
#include "btcsync/netsim/montecarlo.hpp"
#include "btcsync/stability.hpp"
#include "support.hpp"

using namespace btcsync;

namespace {

BlockTree linear_tree(std::size_t blocks) {
  BlockTree tree(testing::synthetic_header(Hash256{}, 0x207fffff, 0));
  Hash256 tip = tree.root();
  for (std::uint32_t i = 1; i < blocks; ++i) {
    const auto h = testing::synthetic_header(tip, 0x207fffff, i);
    tree.insert(h);
    tip = h.hash();
  }
  return tree;
}

void BM_TreeInsert(benchmark::State& state) {
  for (auto _ : state) {
    auto tree = linear_tree(static_cast<std::size_t>(state.range(0)));
    benchmark::DoNotOptimize(tree.max_height());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TreeInsert)->Arg(144)->Arg(1000);

void BM_Stability(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto tree = testing::random_tree(rng, {.max_blocks = 200});
  const auto order = tree.bfs_order();
  const auto kind = state.range(0) ? DepthKind::kWork : DepthKind::kConfirmation;
  for (auto _ : state) {
    for (const auto& h : order) benchmark::DoNotOptimize(is_delta_stable(tree, h, 6, kind));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(order.size()));
}
BENCHMARK(BM_Stability)->Arg(0)->Arg(1);

void BM_CurrentChain(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto tree = testing::random_tree(rng, {.max_blocks = 200});
  for (auto _ : state) benchmark::DoNotOptimize(current_chain(tree));
}
BENCHMARK(BM_CurrentChain);

void BM_AssembleSuccessors(benchmark::State& state) {
  testing::ChainBuilder chain;
  const auto blocks = chain.extend(chain.genesis().hash(), 150);
  const BodyLookup lookup = [&](const Hash256& h) -> const Block* { return &chain.block(h); };
  for (auto _ : state) {
    auto sel = assemble_successors(chain.tree(), lookup, chain.genesis().hash(), {}, {});
    benchmark::DoNotOptimize(sel.response.blocks.size());
  }
}
BENCHMARK(BM_AssembleSuccessors);

void BM_CanisterIngest(benchmark::State& state) {
  testing::ChainBuilder chain;
  const auto blocks = chain.extend(chain.genesis().hash(), 100);
  const SimTime now = std::chrono::seconds(chain.now());
  for (auto _ : state) {
    Canister canister(CanisterConfig{NetworkKind::kRegtest, 6, 2, 1000, StabilityRule::kFullDefinition},
                      chain.params(), chain.genesis());
    for (const auto& h : blocks) {
      GetSuccessorsResponse r;
      r.blocks.push_back({chain.block(h), chain.block(h).header});
      canister.handle_response(r, now);
    }
    benchmark::DoNotOptimize(canister.anchor_height());
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_CanisterIngest);

void BM_EclipseTrials(benchmark::State& state) {
  netsim::SimParams p;
  p.phi = 0.3;
  p.population = 10000;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(netsim::run_eclipse_trial(p, 10000, ++seed));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_EclipseTrials);

}  // namespace

BENCHMARK_MAIN();
