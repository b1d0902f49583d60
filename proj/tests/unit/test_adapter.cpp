#include <doctest.h>

#include <map>
#include <random>

#include "btcsync/adapter.hpp"
#include "btcsync/serialize.hpp"
#include "btcsync/work.hpp"
#include "support.hpp"

using namespace btcsync;
using namespace std::chrono_literals;

namespace {

struct Store {
  std::map<Hash256, Block> blocks;
  BodyLookup lookup() const {
    return [this](const Hash256& h) -> const Block* {
      auto it = blocks.find(h);
      return it == blocks.end() ? nullptr : &it->second;
    };
  }
};

std::vector<Hash256> hashes_of(const GetSuccessorsResponse& r) {
  std::vector<Hash256> out;
  for (const auto& b : r.blocks) out.push_back(b.header.hash());
  return out;
}

std::vector<Hash256> header_hashes(const GetSuccessorsResponse& r) {
  std::vector<Hash256> out;
  for (const auto& h : r.next_headers) out.push_back(h.hash());
  return out;
}

class FakeDirectory : public PeerDirectory {
 public:
  explicit FakeDirectory(std::size_t population) : population_(population) {}
  std::vector<PeerId> request_addresses(std::size_t max) override {
    ++requests;
    std::vector<PeerId> out;
    for (std::size_t i = 0; i < std::min<std::size_t>(max, 25); ++i)
      out.push_back(static_cast<PeerId>(next_++ % population_));
    return out;
  }
  bool connect(PeerId peer) override {
    connected.push_back(peer);
    return !refused.contains(peer);
  }
  std::size_t requests = 0;
  std::vector<PeerId> connected;
  std::set<PeerId> refused;

 private:
  std::size_t population_;
  std::size_t next_ = 0;
};

}  // namespace

TEST_CASE("successors: trace over a forked tree") {
  // g -> a -> b -> c, a -> d; bodies for a, b, d only.
  testing::ChainBuilder chain;
  const auto g = chain.genesis().hash();
  const auto a = chain.mine(g).hash();
  const auto b = chain.mine(a).hash();
  const auto c = chain.mine(b).hash();
  const auto d = chain.mine(a).hash();
  Store store;
  for (const auto& h : {a, b, d}) store.blocks[h] = chain.block(h);

  const auto sel = assemble_successors(chain.tree(), store.lookup(), g, {}, {});
  // BFS: a (parent is anchor), then b and d (parent a included), then c lacks a body.
  const auto level2 = std::min(b, d), level2b = std::max(b, d);
  CHECK(hashes_of(sel.response) == std::vector<Hash256>{a, level2, level2b});
  CHECK(header_hashes(sel.response) == std::vector<Hash256>{c});
  CHECK(sel.missing == std::vector<Hash256>{c});

  // With a processed, only its descendants are returned.
  const auto sel2 = assemble_successors(chain.tree(), store.lookup(), g, {a}, {});
  CHECK(hashes_of(sel2.response) == std::vector<Hash256>{level2, level2b});

  // A block whose parent is neither processed nor included goes out as a header.
  store.blocks[c] = chain.block(c);
  store.blocks.erase(b);
  const auto sel3 = assemble_successors(chain.tree(), store.lookup(), g, {}, {});
  CHECK(hashes_of(sel3.response) == std::vector<Hash256>{a, d});
  CHECK(header_hashes(sel3.response) == std::vector<Hash256>{b, c});

  CHECK_THROWS_AS(assemble_successors(chain.tree(), store.lookup(),
                                      Hash256::from_hex(std::string(64, '4')), {}, {}),
                  UnknownBlockError);
}

TEST_CASE("successors: limits") {
  testing::ChainBuilder chain;
  const auto g = chain.genesis().hash();
  const auto blocks = chain.extend(g, 150);
  Store store;

  SUBCASE("header cap") {
    const auto sel = assemble_successors(chain.tree(), store.lookup(), g, {}, {});
    CHECK(sel.response.next_headers.size() == 100);
    CHECK(sel.response.blocks.empty());
  }
  SUBCASE("size cap admits one oversized final block") {
    for (const auto& h : blocks) store.blocks[h] = chain.block(h);
    const auto small = serialized_size(chain.block(blocks[0]));
    SuccessorLimits limits;
    limits.max_size_bytes = 3 * small - 1;
    const auto sel = assemble_successors(chain.tree(), store.lookup(), g, {}, limits);
    CHECK(sel.response.blocks.size() == 3);
    CHECK(sel.response.next_headers.size() == 100);
  }
  SUBCASE("checkpoint: one block per response") {
    for (const auto& h : blocks) store.blocks[h] = chain.block(h);
    SuccessorLimits limits;
    limits.checkpoint_height = 10;
    const auto below = assemble_successors(chain.tree(), store.lookup(), blocks[8], {}, limits);
    CHECK(below.response.blocks.size() > 1);
    const auto at = assemble_successors(chain.tree(), store.lookup(), blocks[9], {}, limits);
    CHECK(at.response.blocks.size() == 1);
    CHECK(at.response.blocks[0].header.hash() == blocks[10]);
  }
}

TEST_CASE("adapter accepts every valid fork and rejects bad headers") {
  testing::ChainBuilder chain;
  const auto g = chain.genesis().hash();
  const auto a = chain.mine(g);
  const auto b = chain.mine(g);
  Adapter adapter(AdapterConfig::for_network(NetworkKind::kRegtest), chain.params(),
                  chain.genesis().header, 1);
  const SimTime now = std::chrono::seconds(chain.now());
  CHECK(adapter.accept_header(a.header, now).status == AcceptStatus::kAccepted);
  CHECK(adapter.accept_header(b.header, now).status == AcceptStatus::kAccepted);
  CHECK(adapter.accept_header(b.header, now).status == AcceptStatus::kDuplicate);
  CHECK(adapter.header_tree().at_height(1).size() == 2);

  auto bad = a.header;
  bad.time = chain.genesis().header.time;
  const auto target = *CompactTarget::expand(bad.bits);
  while (hash_to_uint(bad.hash()) > target) ++bad.nonce;
  const auto r = adapter.accept_header(bad, now);
  CHECK(r.status == AcceptStatus::kRejected);
  CHECK(r.violation == Violation::kTimeTooOld);

  CHECK(adapter.offer_block(a));
  Block tampered = b;
  tampered.transactions[0].outputs[0].value = 1;
  CHECK_FALSE(adapter.offer_block(tampered));
}

TEST_CASE("adapter request handling fetches and prunes") {
  testing::ChainBuilder chain;
  const auto g = chain.genesis().hash();
  const auto blocks = chain.extend(g, 4);
  auto config = AdapterConfig::for_network(NetworkKind::kRegtest);
  config.preconfigured_peers = {3};
  Adapter adapter(config, chain.params(), chain.genesis().header, 1);
  FakeDirectory dir(10);
  adapter.discover_peers(dir);
  REQUIRE(adapter.peers() == std::set<PeerId>{3});
  adapter.take_outbox();

  const SimTime now = std::chrono::seconds(chain.now());
  HeadersMsg headers;
  for (const auto& h : blocks) headers.headers.push_back(chain.block(h).header);
  adapter.on_peer_message(3, headers, now, dir);
  CHECK(adapter.header_tree().max_height() == 4);

  GetSuccessorsRequest req{chain.genesis().header, {}, {}};
  auto resp = adapter.handle_request(req, now);
  CHECK(resp.blocks.empty());
  CHECK(resp.next_headers.size() == 4);
  const auto out = adapter.take_outbox();
  CHECK(out.size() == 4);
  for (const auto& env : out) CHECK(std::holds_alternative<GetDataMsg>(env.message));
  CHECK(adapter.pending_fetches().size() == 4);

  for (const auto& h : blocks) adapter.on_peer_message(3, BlockMsg{chain.block(h)}, now, dir);
  CHECK(adapter.pending_fetches().empty());
  resp = adapter.handle_request(req, now);
  CHECK(resp.blocks.size() == 4);

  // Bodies at or below the anchor are dropped.
  req.anchor = chain.block(blocks[1]).header;
  adapter.handle_request(req, now);
  CHECK(adapter.block_store().size() == 2);
}

TEST_CASE("transaction cache: relay, delivery and expiry") {
  testing::ChainBuilder chain;
  auto config = AdapterConfig::for_network(NetworkKind::kRegtest);
  config.preconfigured_peers = {1, 2};
  Adapter adapter(config, chain.params(), chain.genesis().header, 1);
  FakeDirectory dir(10);
  adapter.discover_peers(dir);
  adapter.take_outbox();

  const auto tx = testing::spend(OutPoint{Hash256::from_hex(std::string(64, '5')), 0}, 9,
                                 testing::ChainBuilder::default_script());
  const SimTime t0 = std::chrono::seconds(chain.now());
  GetSuccessorsRequest req{chain.genesis().header, {}, {serialize_transaction(tx), Bytes{1, 2}}};
  adapter.handle_request(req, t0);
  REQUIRE(adapter.tx_cache().size() == 1);
  auto out = adapter.take_outbox();
  CHECK(out.size() == 2);  // one inv per peer

  // Peer 1 asks for it.
  adapter.on_peer_message(1, GetDataMsg{{InvItem{InvType::kTx, tx.txid()}}}, t0, dir);
  out = adapter.take_outbox();
  REQUIRE(out.size() == 1);
  CHECK(std::holds_alternative<TxMsg>(out[0].message));

  // Re-advertised to the peer still missing it.
  adapter.tick_tx_cache(t0 + 1min);
  out = adapter.take_outbox();
  REQUIRE(out.size() == 1);
  CHECK(out[0].peer == 2);

  // Peer 2 already has it: delivered everywhere, the entry goes away.
  adapter.on_peer_message(2, InvMsg{{InvItem{InvType::kTx, tx.txid()}}}, t0, dir);
  adapter.tick_tx_cache(t0 + 2min);
  CHECK(adapter.tx_cache().empty());

  // Undelivered transactions expire after ten minutes.
  adapter.handle_request(req, t0);
  REQUIRE(adapter.tx_cache().size() == 1);
  adapter.tick_tx_cache(t0 + 9min);
  CHECK(adapter.tx_cache().size() == 1);
  adapter.tick_tx_cache(t0 + 10min + 1ms);
  CHECK(adapter.tx_cache().empty());
}

TEST_CASE("peer discovery thresholds") {
  testing::ChainBuilder chain;
  AdapterConfig config;
  config.target_connections = 5;
  config.addr_low = 50;
  config.addr_high = 100;
  Adapter adapter(config, chain.params(), chain.genesis().header, 3);
  FakeDirectory dir(1000);
  adapter.discover_peers(dir);
  CHECK(adapter.peers().size() == 5);
  CHECK(adapter.address_pool().size() + adapter.peers().size() == 100);
  CHECK_FALSE(adapter.discovering());

  // Above t_l no new discovery happens.
  const auto requests = dir.requests;
  adapter.on_peer_disconnected(*adapter.peers().begin());
  adapter.discover_peers(dir);
  CHECK(dir.requests == requests);
  CHECK(adapter.peers().size() == 5);
}

TEST_CASE("oversized headers message penalizes the peer") {
  testing::ChainBuilder chain;
  auto config = AdapterConfig::for_network(NetworkKind::kRegtest);
  config.preconfigured_peers = {4};
  config.max_headers_per_message = 2;
  Adapter adapter(config, chain.params(), chain.genesis().header, 1);
  FakeDirectory dir(10);
  adapter.discover_peers(dir);
  HeadersMsg m;
  for (const auto& h : chain.extend(chain.genesis().hash(), 3)) m.headers.push_back(chain.block(h).header);
  dir.refused = {4};
  adapter.on_peer_message(4, m, std::chrono::seconds(chain.now()), dir);
  CHECK(adapter.penalties() == 1);
  CHECK(adapter.peers().empty());
}

TEST_CASE("orphan headers trigger a getheaders with a locator") {
  testing::ChainBuilder chain;
  auto config = AdapterConfig::for_network(NetworkKind::kRegtest);
  config.preconfigured_peers = {4};
  Adapter adapter(config, chain.params(), chain.genesis().header, 1);
  FakeDirectory dir(10);
  adapter.discover_peers(dir);
  adapter.take_outbox();
  const auto blocks = chain.extend(chain.genesis().hash(), 2);
  adapter.on_peer_message(4, HeadersMsg{{chain.block(blocks[1]).header}},
                          std::chrono::seconds(chain.now()), dir);
  const auto out = adapter.take_outbox();
  REQUIRE(out.size() == 1);
  const auto* gh = std::get_if<GetHeadersMsg>(&out[0].message);
  REQUIRE(gh);
  CHECK(gh->locator == std::vector<Hash256>{chain.genesis().hash()});
  CHECK(adapter.penalties() == 0);
}
