#include "btcsync/netsim/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "btcsync/netsim/world.hpp"

namespace btcsync::netsim {

namespace {

constexpr std::uint64_t kChunk = 4096;

/// Runs fn(chunk_index, begin, end) over fixed chunks of [0, trials) on all
/// hardware threads. Chunk seeding makes results independent of the thread count.
template <typename Fn>
void for_chunks(std::uint64_t trials, std::uint64_t chunk, Fn&& fn) {
  const std::uint64_t chunks = (trials + chunk - 1) / chunk;
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (auto c = next++; c < chunks; c = next++) fn(c, c * chunk, std::min(trials, (c + 1) * chunk));
  };
  const auto hw = std::max(1u, std::thread::hardware_concurrency());
  const auto count = static_cast<unsigned>(std::min<std::uint64_t>(hw, chunks));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < count; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

void require_trials(std::uint64_t trials) {
  if (trials == 0) throw std::invalid_argument("trials must be at least 1");
}

}  // namespace

std::vector<PeerId> sample_adapter_peers(std::size_t population, std::size_t ell,
                                         std::mt19937_64& rng) {
  if (ell > population)
    throw std::invalid_argument("cannot sample " + std::to_string(ell) + " peers from " +
                                std::to_string(population));
  // Floyd's algorithm: uniform ell-subset without replacement.
  std::vector<PeerId> out;
  out.reserve(ell);
  for (std::size_t j = population - ell; j < population; ++j) {
    std::uniform_int_distribution<std::size_t> d(0, j);
    const auto t = static_cast<PeerId>(d(rng));
    if (std::find(out.begin(), out.end(), t) == out.end()) {
      out.push_back(t);
    } else {
      out.push_back(static_cast<PeerId>(j));
    }
  }
  return out;
}

EclipseEstimate run_eclipse_trial(const SimParams& params, std::uint64_t trials,
                                  std::uint64_t seed) {
  require_trials(trials);
  params.validate();
  const auto corrupted =
      static_cast<std::size_t>(std::floor(params.phi * params.population + 1e-9));
  const std::uint64_t chunks = (trials + kChunk - 1) / kChunk;
  std::vector<std::uint64_t> eclipsed(chunks), any(chunks);

  for_chunks(trials, kChunk, [&](std::uint64_t c, std::uint64_t begin, std::uint64_t end) {
    std::mt19937_64 rng(derive_seed(seed, c));
    for (auto t = begin; t < end; ++t) {
      bool hit = false;
      for (std::size_t a = 0; a < params.n; ++a) {
        const auto peers = sample_adapter_peers(params.population, params.ell, rng);
        const bool all_bad = std::all_of(peers.begin(), peers.end(),
                                         [&](PeerId p) { return p < corrupted; });
        eclipsed[c] += all_bad;
        hit |= all_bad;
      }
      any[c] += hit;
    }
  });

  EclipseEstimate e;
  e.trials = trials;
  e.adapter_samples = trials * params.n;
  std::uint64_t total_eclipsed = 0, total_any = 0;
  for (std::uint64_t c = 0; c < chunks; ++c) {
    total_eclipsed += eclipsed[c];
    total_any += any[c];
  }
  e.per_adapter = static_cast<double>(total_eclipsed) / static_cast<double>(e.adapter_samples);
  e.any_adapter = static_cast<double>(total_any) / static_cast<double>(trials);
  return e;
}

DowntimeEstimate run_downtime_attack(const SimParams& params, std::uint64_t trials,
                                     std::uint64_t seed) {
  require_trials(trials);
  params.validate();
  const std::uint64_t chunks = (trials + kChunk - 1) / kChunk;
  std::vector<std::uint64_t> wins(chunks);

  for_chunks(trials, kChunk, [&](std::uint64_t c, std::uint64_t begin, std::uint64_t end) {
    std::mt19937_64 rng(derive_seed(seed, c));
    std::uniform_int_distribution<std::size_t> maker(0, params.n - 1);
    for (auto t = begin; t < end; ++t) {
      bool success = true;
      for (std::uint64_t r = 0; r < params.c_star && success; ++r) success = maker(rng) < params.f;
      wins[c] += success;
    }
  });

  std::uint64_t total = 0;
  for (auto w : wins) total += w;
  return DowntimeEstimate{static_cast<double>(total) / static_cast<double>(trials), trials};
}

ForkAttackResult run_fork_attack(const SimParams& params, std::uint64_t trials,
                                 std::uint64_t seed, SimTime attack_after, SimTime duration) {
  require_trials(trials);
  SimParams p = params;
  p.strategy = AdversaryStrategy::kWithholdAndRelease;
  p.validate();

  ForkAttackResult r;
  r.per_run.assign(trials, 0);
  for_chunks(trials, 1, [&](std::uint64_t, std::uint64_t begin, std::uint64_t end) {
    for (auto t = begin; t < end; ++t) {
      World w(p, derive_seed(seed, t));
      w.run_until(w.origin() + attack_after);
      w.start_attack();
      w.run_until(w.origin() + duration);
      r.per_run[t] = w.corrupt_max_confirmations();
    }
  });
  for (auto c : r.per_run) {
    r.max_confirmations = std::max(r.max_confirmations, c);
    if (c >= static_cast<std::int64_t>(p.c_star)) ++r.runs_reaching_c_star;
  }
  return r;
}

double analytic_eclipse_per_adapter(double phi, std::size_t ell) {
  return std::pow(phi, static_cast<double>(ell));
}

double analytic_eclipse_any(double phi, std::size_t ell, std::size_t n) {
  return 1.0 - std::pow(1.0 - analytic_eclipse_per_adapter(phi, ell), static_cast<double>(n));
}

double analytic_downtime_success(std::size_t f, std::size_t n, std::uint64_t c_star) {
  return std::pow(static_cast<double>(f) / static_cast<double>(n), static_cast<double>(c_star));
}

}  // namespace btcsync::netsim
