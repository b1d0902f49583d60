#include "btcsync/netsim/world.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "btcsync/address.hpp"
#include "btcsync/netsim/montecarlo.hpp"
#include "btcsync/serialize.hpp"
#include "btcsync/stability.hpp"

namespace btcsync::netsim {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr std::uint64_t kCoinbaseValue = 50ULL * 100'000'000ULL;
constexpr std::uint32_t kMaturity = 10;
constexpr std::uint32_t kMaxInjectDepth = kMaturity - 2;
constexpr std::uint32_t kGiveUpGap = 3;
constexpr std::size_t kMaxMempoolPerBlock = 64;
constexpr std::size_t kAddressBatch = 32;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Hash160 key_hash(const std::string& label) {
  const auto digest = sha256(ByteSpan(reinterpret_cast<const std::uint8_t*>(label.data()),
                                      label.size()));
  Hash160 out{};
  std::copy_n(digest.begin(), out.size(), out.begin());
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

bool later(const auto& a, const auto& b) {
  return a.time != b.time ? a.time > b.time : a.seq > b.seq;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

void write_observations_csv(std::ostream& out, const std::vector<Observation>& log,
                            SimTime origin) {
  out << "time,event,subject,detail\n";
  for (const auto& o : log) {
    out << (o.time - origin).count() << ',' << csv_field(o.event) << ','
        << csv_field(o.subject) << ',' << csv_field(o.detail) << '\n';
  }
}

class World::Directory : public PeerDirectory {
 public:
  explicit Directory(World& world) : world_(world) {}

  std::vector<PeerId> request_addresses(std::size_t max) override {
    const auto k = std::min({max, kAddressBatch, world_.params_.population});
    return sample_adapter_peers(world_.params_.population, k, world_.rng_);
  }

  bool connect(PeerId peer) override { return peer < world_.params_.population; }

 private:
  World& world_;
};

World::World(SimParams params, std::uint64_t seed)
    : params_((params.validate(), params)),
      rng_(derive_seed(seed, 0)),
      chain_(ChainParams::for_network(NetworkKind::kRegtest)),
      honest_(genesis_block(NetworkKind::kRegtest).header, chain_.work_policy),
      published_(honest_),
      adversary_view_(honest_) {
  const Block genesis = genesis_block(NetworkKind::kRegtest);
  origin_ = now_ = SimTime(static_cast<std::int64_t>(genesis.header.time) * 1000);
  blocks_.emplace(genesis.hash(), genesis);

  std::vector<PeerId> ids(params_.population);
  for (PeerId i = 0; i < ids.size(); ++i) ids[i] = i;
  std::shuffle(ids.begin(), ids.end(), rng_);
  corrupted_.assign(params_.population, false);
  const auto bad = static_cast<std::size_t>(std::floor(params_.phi * params_.population + 1e-9));
  for (std::size_t i = 0; i < bad; ++i) corrupted_[ids[i]] = true;

  for (std::size_t i = 0; i < params_.address_count; ++i) {
    const auto key = key_hash("sim-address-" + std::to_string(i));
    scripts_.push_back(i % 3 == 2 ? p2wpkh_script(key) : p2pkh_script(key));
    addresses_.push_back(address_of_script(scripts_.back(), NetworkKind::kRegtest));
  }
  adversary_script_ = p2pkh_script(key_hash("sim-adversary"));
  adversary_address_ = address_of_script(adversary_script_, NetworkKind::kRegtest);

  CanisterConfig cc;
  cc.network = NetworkKind::kRegtest;
  cc.delta = params_.delta;
  cc.tau = params_.tau;
  cc.page_size = params_.page_size;
  cc.rule = params_.rule;
  canister_ = std::make_unique<Canister>(cc, chain_, genesis);
  last_anchor_ = canister_->anchor();

  AdapterConfig ac;
  ac.target_connections = params_.ell;
  ac.addr_high = params_.population;
  ac.addr_low = std::min(params_.population, std::max(params_.ell, params_.population / 2));
  ac.checkpoint_height = params_.checkpoint_height;
  adapters_.reserve(params_.n);
  for (std::size_t i = 0; i < params_.n; ++i) {
    adapters_.emplace_back(ac, chain_, genesis.header, derive_seed(seed, 100 + i));
    directories_.push_back(std::make_unique<Directory>(*this));
  }

  std::ostringstream d;
  d << "n=" << params_.n << " f=" << params_.f << " ell=" << params_.ell
    << " phi=" << params_.phi << " alpha=" << params_.adversary_hash_fraction
    << " strategy=" << to_string(params_.strategy);
  observe("start", "world", d.str());

  for (std::size_t i = 0; i < adapters_.size(); ++i) {
    adapters_[i].discover_peers(*directories_[i]);
    route_outbox(i);
  }
  schedule_mining(true);
  schedule(now_ + params_.round_interval, RoundEvent{});
  schedule(now_ + params_.tick_interval, TickEvent{});
}

World::~World() = default;

void World::observe(std::string event, std::string subject, std::string detail) {
  log_.push_back(Observation{now_, std::move(event), std::move(subject), std::move(detail)});
}

void World::schedule(SimTime at, Payload payload) {
  queue_.push_back(Event{at, seq_++, std::move(payload)});
  std::push_heap(queue_.begin(), queue_.end(), [](const Event& a, const Event& b) {
    return later(a, b);
  });
}

SimTime World::latency() {
  std::uniform_int_distribution<std::int64_t> d(params_.latency_min.count(),
                                                params_.latency_max.count());
  return SimTime(d(rng_));
}

void World::schedule_mining(bool honest) {
  const double share =
      honest ? 1.0 - params_.adversary_hash_fraction : params_.adversary_hash_fraction;
  if (share <= 0.0) return;
  std::exponential_distribution<double> gap(share / params_.honest_block_interval);
  const auto ms = std::max<std::int64_t>(1, std::llround(gap(rng_) * 1000.0));
  schedule(now_ + SimTime(ms), MineEvent{honest, mine_epoch_});
}

bool World::step() {
  if (queue_.empty()) return false;
  std::pop_heap(queue_.begin(), queue_.end(), [](const Event& a, const Event& b) {
    return later(a, b);
  });
  Event ev = std::move(queue_.back());
  queue_.pop_back();
  now_ = ev.time;
  dispatch(ev);
  return true;
}

void World::run_until(SimTime t) {
  while (!queue_.empty() && queue_.front().time <= t) step();
  now_ = std::max(now_, t);
}

void World::dispatch(Event& ev) {
  std::visit(Overloaded{
                 [&](const MineEvent& e) { on_mine(e); },
                 [&](ToPeer& e) { on_to_peer(e); },
                 [&](ToAdapter& e) { on_to_adapter(e); },
                 [&](const RoundEvent&) { on_round(); },
                 [&](const TickEvent&) { on_tick(); },
             },
             ev.payload);
}

Hash256 World::honest_tip() const { return current_chain(honest_).back(); }

std::uint32_t World::honest_height() const { return honest_.node(honest_tip()).height; }

std::uint32_t World::adversary_height() const {
  return fork_.empty() ? 0 : adversary_view_.node(fork_.back()).height;
}

const Block* World::find_block(const Hash256& hash) const {
  auto it = blocks_.find(hash);
  return it == blocks_.end() ? nullptr : &it->second;
}

std::optional<Hash256> World::corrupting_txid() const {
  if (!corrupting_tx_) return std::nullopt;
  return corrupting_tx_->txid();
}

void World::set_mining(bool on) {
  if (on == mining_) return;
  mining_ = on;
  ++mine_epoch_;
  observe(on ? "mining-start" : "mining-stop", "miners", "");
  if (on) {
    schedule_mining(true);
    if (attack_active_) schedule_mining(false);
  }
}

void World::start_downtime() {
  downtime_ = true;
  observe("downtime-start", "canister", "anchor=" + std::to_string(canister_->anchor_height()));
}

void World::stop_downtime() {
  downtime_ = false;
  observe("downtime-stop", "canister", "honest_height=" + std::to_string(honest_height()));
}

void World::start_attack() {
  if (attack_active_ || params_.strategy == AdversaryStrategy::kNone) {
    observe("attack-start", std::string(to_string(params_.strategy)), "ignored");
    return;
  }
  attack_active_ = true;

  Transaction tx;
  TxIn in;
  std::uint64_t value = kCoinbaseValue;
  if (!spendable_.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, spendable_.size() - 1);
    const auto idx = pick(rng_);
    const auto s = spendable_[idx];
    spendable_[idx] = spendable_.back();
    spendable_.pop_back();
    in.prevout = s.outpoint;
    value = s.value;

    // The honest network sees a payment of the same output.
    Transaction payment;
    payment.inputs = {TxIn{s.outpoint, Bytes{0x01}, 0xffffffff}};
    payment.outputs = {TxOut{value, scripts_.front()}};
    seen_txs_.insert(payment.txid());
    mempool_.push_back(std::move(payment));
  } else {
    const std::string label = "sim-corrupting-input";
    in.prevout = OutPoint{
        sha256d(ByteSpan(reinterpret_cast<const std::uint8_t*>(label.data()), label.size())), 0};
  }
  in.script_sig = Bytes{0x02};
  tx.inputs = {in};
  tx.outputs = {TxOut{value, adversary_script_}};
  corrupting_tx_ = tx;

  fork_.clear();
  released_ = 0;
  fork_base_ = params_.strategy == AdversaryStrategy::kFeedDuringDowntime ? canister_->tip()
                                                                          : honest_tip();
  observe("attack-start", std::string(to_string(params_.strategy)),
          "txid=" + tx.txid().short_hex() + " base=" + fork_base_.short_hex());
  if (mining_) schedule_mining(false);
}

void World::inject_fork(std::uint32_t depth, std::uint32_t length) {
  if (depth > kMaxInjectDepth)
    throw std::invalid_argument("inject-fork depth must be at most " +
                                std::to_string(kMaxInjectDepth));
  const auto tip = honest_tip();
  const auto height = honest_.node(tip).height;
  depth = std::min(depth, height);
  Hash256 parent = *honest_.ancestor_at(tip, height - depth);
  observe("inject-fork", parent.short_hex(),
          "depth=" + std::to_string(depth) + " length=" + std::to_string(length));
  for (std::uint32_t i = 0; i < length; ++i) {
    const auto block = make_block(honest_, parent, {}, random_script());
    add_honest_block(block, "inject");
    parent = block.hash();
  }
}

const Bytes& World::random_script() {
  // Skewed so that a few addresses collect many outputs.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double x = u(rng_);
  const auto idx = std::min(scripts_.size() - 1,
                            static_cast<std::size_t>(x * x * static_cast<double>(scripts_.size())));
  return scripts_[idx];
}

Transaction World::random_spend() {
  std::uniform_int_distribution<std::size_t> pick(0, spendable_.size() - 1);
  const auto idx = pick(rng_);
  const auto s = spendable_[idx];
  spendable_[idx] = spendable_.back();
  spendable_.pop_back();

  Transaction tx;
  ByteWriter sig;
  sig.u64(rng_());
  tx.inputs = {TxIn{s.outpoint, std::move(sig).bytes(), 0xffffffff}};
  std::bernoulli_distribution split(0.5);
  if (s.value >= 2 && split(rng_)) {
    std::uniform_int_distribution<std::uint64_t> part(1, s.value - 1);
    const auto a = part(rng_);
    tx.outputs = {TxOut{a, random_script()}, TxOut{s.value - a, random_script()}};
  } else {
    tx.outputs = {TxOut{s.value, random_script()}};
  }
  return tx;
}

Block World::make_block(const BlockTree& tree, const Hash256& parent,
                        std::vector<Transaction> txs, const Bytes& payout) {
  const auto& p = tree.node(parent);
  Transaction cb;
  ByteWriter tag;
  tag.u32(p.height + 1);
  tag.u64(rng_());
  cb.inputs = {TxIn{OutPoint::null(), std::move(tag).bytes(), 0xffffffff}};
  cb.outputs = {TxOut{kCoinbaseValue, payout}};

  Block b;
  b.transactions.reserve(txs.size() + 1);
  b.transactions.push_back(std::move(cb));
  for (auto& tx : txs) b.transactions.push_back(std::move(tx));
  b.header.version = 0x20000000;
  b.header.prev = parent;
  b.header.bits = expected_next_bits(p, tree, chain_);
  b.header.merkle_root = block_merkle_root(b);
  b.header.time = std::max(unix_seconds(now_), median_time_past(p, tree, chain_) + 1);
  b.header.nonce = static_cast<std::uint32_t>(rng_());
  const auto target = *CompactTarget::expand(b.header.bits);
  while (hash_to_uint(b.header.hash()) > target) ++b.header.nonce;
  return b;
}

void World::on_mine(const MineEvent& ev) {
  if (ev.epoch != mine_epoch_ || !mining_) return;
  if (!ev.honest) {
    mine_adversary();
    schedule_mining(false);
    return;
  }
  auto parent = honest_tip();
  std::bernoulli_distribution stale(params_.honest_fork_probability);
  if (params_.honest_fork_probability > 0.0 && stale(rng_) && honest_.node(parent).parent)
    parent = *honest_.node(parent).parent;

  std::vector<Transaction> txs;
  for (std::size_t i = 0; i < mempool_.size() && txs.size() < kMaxMempoolPerBlock; ++i)
    txs.push_back(mempool_[i]);
  std::uniform_int_distribution<std::size_t> spends(0, params_.max_spends_per_block);
  for (auto k = spends(rng_); k > 0 && !spendable_.empty(); --k) txs.push_back(random_spend());

  const auto block = make_block(honest_, parent, std::move(txs), random_script());
  add_honest_block(block, parent == honest_tip() ? "mine" : "mine-stale");
  schedule_mining(true);
}

void World::add_honest_block(const Block& block, std::string_view how) {
  const auto hash = block.hash();
  honest_.insert(block.header);
  published_.insert(block.header);
  adversary_view_.insert(block.header);
  blocks_.emplace(hash, block);
  ++honest_mined_;

  std::unordered_set<Hash256, Hash256Hasher> included;
  for (const auto& tx : block.transactions) included.insert(tx.txid());
  std::erase_if(mempool_, [&](const Transaction& tx) { return included.contains(tx.txid()); });

  mature_outputs();
  announce(block.header, false);
  observe(std::string(how), hash.short_hex(),
          "height=" + std::to_string(honest_.node(hash).height) +
              " parent=" + block.header.prev.short_hex() +
              " txs=" + std::to_string(block.transactions.size()));

  if (attack_active_ && params_.strategy == AdversaryStrategy::kWithholdAndRelease &&
      !fork_.empty() && honest_height() >= adversary_height() + kGiveUpGap)
    restart_fork();
}

void World::mature_outputs() {
  const auto chain = current_chain(honest_);
  const auto height = static_cast<std::uint32_t>(chain.size() - 1);
  while (matured_height_ + kMaturity <= height) {
    ++matured_height_;
    for (const auto& tx : blocks_.at(chain[matured_height_]).transactions) {
      const auto txid = tx.txid();
      for (std::uint32_t i = 0; i < tx.outputs.size(); ++i) {
        if (tx.outputs[i].value > 0) spendable_.push_back({OutPoint{txid, i}, tx.outputs[i].value});
      }
    }
  }
}

std::uint32_t World::budget_reference() const {
  if (params_.strategy == AdversaryStrategy::kFeedDuringDowntime) return honest_height();
  // Highest honest block the canister has seen.
  const auto& seen = canister_->tree();
  Hash256 cur = honest_tip();
  while (!seen.contains(cur)) cur = *honest_.node(cur).parent;
  return honest_.node(cur).height;
}

void World::mine_adversary() {
  if (!attack_active_) return;
  if (params_.strategy == AdversaryStrategy::kWithholdAndRelease && fork_.empty())
    fork_base_ = honest_tip();
  const Hash256 parent = fork_.empty() ? fork_base_ : fork_.back();
  const auto height = adversary_view_.node(parent).height + 1;
  if (params_.budget_enabled && height >= budget_reference() + params_.c_star) {
    ++budget_blocked_;
    return;
  }

  std::vector<Transaction> txs;
  if (fork_.empty()) txs.push_back(*corrupting_tx_);
  const auto block = make_block(adversary_view_, parent, std::move(txs), adversary_script_);
  const auto hash = block.hash();
  adversary_view_.insert(block.header);
  blocks_.emplace(hash, block);
  adversary_blocks_.insert(hash);
  if (fork_.empty()) corrupt_blocks_.insert(hash);
  fork_.push_back(hash);
  ++adversary_mined_;

  if (params_.budget_enabled && !(height < budget_reference() + params_.c_star))
    throw std::logic_error("adversary fork exceeds its hash budget");
  observe("adversary-mine", hash.short_hex(),
          "height=" + std::to_string(height) + " fork=" + std::to_string(fork_.size()));

  if (params_.strategy == AdversaryStrategy::kWithholdAndRelease &&
      (released_ > 0 || height > honest_height()))
    release_fork();
}

void World::restart_fork() {
  observe("fork-abandon", fork_base_.short_hex(),
          "fork=" + std::to_string(fork_.size()) + " honest_height=" +
              std::to_string(honest_height()));
  fork_.clear();
  released_ = 0;
  fork_base_ = honest_tip();
  ++fork_restarts_;
}

void World::release_fork() {
  const auto from = released_;
  for (; released_ < fork_.size(); ++released_) {
    const auto& header = blocks_.at(fork_[released_]).header;
    published_.insert(header);
    announce(header, true);
  }
  if (released_ > from) {
    observe("release", fork_.back().short_hex(),
            "blocks=" + std::to_string(released_ - from) +
                " height=" + std::to_string(adversary_height()));
  }
}

void World::announce(const BlockHeader& header, bool corrupted_only) {
  for (std::size_t a = 0; a < adapters_.size(); ++a) {
    for (auto p : adapters_[a].peers()) {
      if (corrupted_only && !corrupted_[p]) continue;
      schedule(now_ + latency(), ToAdapter{a, p, HeadersMsg{{header}}});
    }
  }
}

void World::route_outbox(std::size_t adapter) {
  for (auto& env : adapters_[adapter].take_outbox())
    schedule(now_ + latency(), ToPeer{adapter, env.peer, std::move(env.message)});
}

const BlockTree& World::view_of(PeerId peer) const {
  return corrupted_[peer] ? published_ : honest_;
}

void World::on_to_peer(ToPeer& ev) {
  const auto& view = view_of(ev.peer);
  auto reply = [&](WireMessage m) {
    schedule(now_ + latency(), ToAdapter{ev.adapter, ev.peer, std::move(m)});
  };
  std::visit(
      Overloaded{
          [&](const GetHeadersMsg& m) {
            // First locator entry on the peer's best chain, as in Bitcoin Core.
            Hash256 start = view.root();
            const auto best = current_chain(view).back();
            for (const auto& h : m.locator) {
              if (view.contains(h) && view.is_ancestor(h, best)) {
                start = h;
                break;
              }
            }
            HeadersMsg out;
            std::vector<Hash256> queue{start};
            for (std::size_t i = 0; i < queue.size(); ++i) {
              for (const auto& c : view.node(queue[i]).children) {
                if (out.headers.size() >= adapters_[ev.adapter].config().max_headers_per_message)
                  break;
                queue.push_back(c);
                out.headers.push_back(view.node(c).header);
              }
            }
            if (!out.headers.empty()) reply(std::move(out));
          },
          [&](const GetDataMsg& m) {
            for (const auto& item : m.items) {
              if (item.type != InvType::kBlock || !view.contains(item.hash)) continue;
              if (const auto* b = find_block(item.hash)) reply(BlockMsg{*b});
            }
          },
          [&](const InvMsg& m) {
            GetDataMsg want;
            for (const auto& item : m.items)
              if (item.type == InvType::kTx && !seen_txs_.contains(item.hash))
                want.items.push_back(item);
            if (!want.items.empty()) reply(std::move(want));
          },
          [&](const TxMsg& m) {
            if (corrupted_[ev.peer]) return;
            const auto txid = m.tx.txid();
            if (!seen_txs_.insert(txid).second) return;
            mempool_.push_back(m.tx);
            observe("tx-relay", txid.short_hex(), "peer=" + std::to_string(ev.peer));
          },
          [](const auto&) {},
      },
      ev.message);
}

void World::on_to_adapter(ToAdapter& ev) {
  adapters_[ev.adapter].on_peer_message(ev.peer, ev.message, now_, *directories_[ev.adapter]);
  route_outbox(ev.adapter);
}

void World::on_tick() {
  for (std::size_t i = 0; i < adapters_.size(); ++i) {
    adapters_[i].tick_tx_cache(now_);
    if (adapters_[i].peers().size() < params_.ell) adapters_[i].discover_peers(*directories_[i]);
    route_outbox(i);
  }
  schedule(now_ + params_.tick_interval, TickEvent{});
}

std::optional<GetSuccessorsResponse> World::malicious_feed() {
  if (params_.strategy != AdversaryStrategy::kFeedDuringDowntime || !attack_active_) return {};
  const auto& tree = canister_->tree();
  const auto& anchor = canister_->anchor();
  for (const auto& hash : fork_) {
    if (const auto* n = tree.find(hash); n && (n->has_body() || tree.is_ancestor(hash, anchor)))
      continue;
    const auto& block = blocks_.at(hash);
    const auto* parent = tree.find(block.header.prev);
    if (!parent || !(parent->has_body() || parent->hash == anchor)) return {};
    GetSuccessorsResponse r;
    r.blocks.push_back(SuccessorBlock{block, block.header});
    return r;
  }
  return {};
}

void World::on_round() {
  schedule(now_ + params_.round_interval, RoundEvent{});
  ++rounds_;
  std::uniform_int_distribution<std::size_t> draw(0, params_.n - 1);
  const auto maker = draw(rng_);
  if (downtime_) return;
  const bool malicious = maker < params_.f;
  if (malicious) ++malicious_rounds_;

  auto fed = malicious ? malicious_feed() : std::nullopt;
  const auto request = canister_->build_request();
  GetSuccessorsResponse response;
  for (std::size_t i = 0; i < adapters_.size(); ++i) {
    GetSuccessorsResponse r;
    try {
      r = adapters_[i].handle_request(request, now_);
    } catch (const UnknownBlockError&) {
      // This adapter has not heard of the anchor yet.
    }
    route_outbox(i);
    if (i == maker) response = std::move(r);
  }
  if (fed) {
    response = std::move(*fed);
    ++fed_blocks_;
  }

  const auto out = canister_->handle_response(response, now_);
  if (out.blocks_accepted + out.blocks_rejected + out.headers_accepted + out.headers_rejected > 0) {
    std::ostringstream d;
    d << "malicious=" << malicious << " fed=" << fed.has_value()
      << " blocks=" << out.blocks_accepted << " headers=" << out.headers_accepted
      << " rejected=" << out.blocks_rejected + out.headers_rejected
      << " anchor=" << canister_->anchor_height();
    observe("round", "maker-" + std::to_string(maker), d.str());
  }
  if (canister_->anchor() != last_anchor_) {
    last_anchor_ = canister_->anchor();
    observe("anchor", last_anchor_.short_hex(),
            "height=" + std::to_string(canister_->anchor_height()));
  }
  if (canister_->reorgs() != last_reorgs_) {
    last_reorgs_ = canister_->reorgs();
    observe("reorg", canister_->tip().short_hex(), "count=" + std::to_string(last_reorgs_));
  }
  track_corrupt_confirmations();
}

void World::track_corrupt_confirmations() {
  const auto& tree = canister_->tree();
  const auto& anchor = canister_->anchor();
  for (const auto& h : corrupt_blocks_) {
    const auto* n = tree.find(h);
    if (!n || !(n->has_body() || tree.is_ancestor(h, anchor))) continue;
    const auto c = confirmations(tree, h);
    if (c > corrupt_max_conf_) {
      corrupt_max_conf_ = c;
      observe("corrupt-confirmations", h.short_hex(), "confirmations=" + std::to_string(c));
    }
  }
}

std::map<std::string, double> World::metrics() const {
  std::map<std::string, double> m;
  const auto& c = *canister_;
  m["sim_seconds"] = std::chrono::duration<double>(elapsed()).count();
  m["honest_height"] = honest_height();
  m["honest_blocks_mined"] = static_cast<double>(honest_mined_);
  m["adversary_height"] = adversary_height();
  m["adversary_blocks_mined"] = static_cast<double>(adversary_mined_);
  m["adversary_budget_blocked"] = static_cast<double>(budget_blocked_);
  m["fork_restarts"] = static_cast<double>(fork_restarts_);
  m["canister_anchor_height"] = c.anchor_height();
  m["canister_tip_height"] = c.tree().node(c.tip()).height;
  m["canister_header_height"] = c.tree().max_height();
  m["canister_synced"] = c.synced() ? 1 : 0;
  m["canister_utxos"] = static_cast<double>(c.utxos().size());
  m["canister_tree_size"] = static_cast<double>(c.tree().size());
  m["blocks_ingested"] = static_cast<double>(c.blocks_ingested());
  m["reorgs"] = static_cast<double>(c.reorgs());
  m["anomalies"] = static_cast<double>(c.anomalies());
  m["deep_fork_events"] = static_cast<double>(c.deep_fork_events());
  m["rounds"] = static_cast<double>(rounds_);
  m["malicious_rounds"] = static_cast<double>(malicious_rounds_);
  m["fed_blocks"] = static_cast<double>(fed_blocks_);
  m["corrupt_max_confirmations"] = static_cast<double>(corrupt_max_conf_);
  std::size_t penalties = 0, min_peers = params_.population;
  for (const auto& a : adapters_) {
    penalties += a.penalties();
    min_peers = std::min(min_peers, a.peers().size());
  }
  m["adapter_penalties"] = static_cast<double>(penalties);
  m["adapter_min_peers"] = static_cast<double>(min_peers);
  m["delta"] = static_cast<double>(params_.delta);
  m["tau"] = static_cast<double>(params_.tau);
  m["c_star"] = static_cast<double>(params_.c_star);
  m["n"] = static_cast<double>(params_.n);
  m["f"] = static_cast<double>(params_.f);
  return m;
}

}  // namespace btcsync::netsim
