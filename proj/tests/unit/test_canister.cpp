#include <doctest.h>

#include <sstream>

#include "btcsync/address.hpp"
#include "btcsync/canister.hpp"
#include "btcsync/serialize.hpp"
#include "support.hpp"

using namespace btcsync;

namespace {

constexpr auto kNet = NetworkKind::kRegtest;

const Bytes& alice() {
  static const Bytes s = p2pkh_script(Hash160{0xa1});
  return s;
}
std::string alice_address() { return address_of_script(alice(), kNet); }

struct Fixture {
  testing::ChainBuilder chain;
  Canister canister;

  explicit Fixture(std::uint64_t delta = 2, std::size_t page_size = 1000,
                   StabilityRule rule = StabilityRule::kFullDefinition)
      : canister(CanisterConfig{kNet, delta, 2, page_size, rule}, chain.params(), chain.genesis()) {}

  SimTime now() const { return std::chrono::seconds(chain.now()); }

  ResponseOutcome feed(const std::vector<Hash256>& blocks, const std::vector<Hash256>& headers = {}) {
    GetSuccessorsResponse r;
    for (const auto& h : blocks) r.blocks.push_back({chain.block(h), chain.block(h).header});
    for (const auto& h : headers) r.next_headers.push_back(chain.block(h).header);
    return canister.handle_response(r, now());
  }
  std::uint32_t tip_height() const { return canister.tree().node(canister.tip()).height; }
};

std::vector<Utxo> all_pages(const Canister& c, const std::string& address, std::size_t* pages = nullptr) {
  std::vector<Utxo> out;
  auto res = c.get_utxos(address, kNet);
  REQUIRE(res);
  std::size_t n = 1;
  out = res.value().utxos;
  auto token = res.value().next_page;
  while (token) {
    auto more = c.get_utxos(address, kNet, UtxosFilter{PageToken{*token}});
    REQUIRE(more);
    ++n;
    out.insert(out.end(), more.value().utxos.begin(), more.value().utxos.end());
    token = more.value().next_page;
  }
  if (pages) *pages = n;
  return out;
}

}  // namespace

TEST_CASE("anchor trace with delta 2") {
  Fixture fx;
  const auto g = fx.chain.genesis().hash();
  const auto b = fx.chain.extend(g, 5, alice());

  // One block at a time: the anchor trails the tip by delta - 1.
  const std::uint32_t expected_anchor[] = {0, 1, 2, 3, 4};
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto out = fx.feed({b[i]});
    CHECK(out.blocks_accepted == 1);
    CHECK(fx.canister.anchor_height() == expected_anchor[i]);
    CHECK(fx.tip_height() == i + 1);
  }
  CHECK(fx.canister.anchor() == b[3]);
  // Bodies at or below the anchor are released; the UTXO set holds the
  // genesis output plus four coinbases.
  CHECK_FALSE(fx.canister.tree().node(b[3]).has_body());
  CHECK(fx.canister.tree().node(b[4]).has_body());
  CHECK(fx.canister.utxos().size() == 5);
  CHECK(fx.canister.blocks_ingested() == 5);
  CHECK(fx.canister.reorgs() == 0);
}

TEST_CASE("fork above the anchor reorganizes and resolves") {
  Fixture fx;
  const auto g = fx.chain.genesis().hash();
  const auto b = fx.chain.extend(g, 3, alice());
  fx.feed(b);
  REQUIRE(fx.canister.anchor() == b[1]);

  // Rival branch from b[1]: c[0] ties b[2], then c[1] takes the tip.
  const auto c = fx.chain.extend(b[1], 3);
  fx.feed({c[0]});
  CHECK(fx.canister.anchor() == b[1]);
  fx.feed({c[1]});
  CHECK(fx.canister.reorgs() == 1);
  CHECK(fx.canister.tip() == c[1]);
  // Lead of c3 over b3 is one block: not yet stable.
  CHECK(fx.canister.anchor() == b[1]);
  fx.feed({c[2]});
  CHECK(fx.canister.anchor() == c[1]);
  CHECK_FALSE(fx.canister.tree().contains(b[2]));

  // The final UTXO set equals a replay of the anchor's chain.
  const auto& chain = fx.chain;
  const auto oracle = testing::replay_chain(
      {&chain.genesis(), &chain.block(b[0]), &chain.block(b[1]), &chain.block(c[0]),
       &chain.block(c[1])});
  CHECK(fx.canister.utxos().entries() == oracle);
}

TEST_CASE("ratio-only rule ignores rivals") {
  Fixture fx(2, 1000, StabilityRule::kRatioOnly);
  const auto g = fx.chain.genesis().hash();
  const auto a = fx.chain.extend(g, 2);
  const auto b = fx.chain.extend(g, 1);
  fx.feed({b[0], a[0], a[1]});
  // a1 has depth 2 and becomes the anchor despite the equal-height rival.
  CHECK(fx.canister.anchor() == a[0]);
}

TEST_CASE("deep forks are rejected and counted") {
  Fixture fx;
  const auto g = fx.chain.genesis().hash();
  const auto b = fx.chain.extend(g, 4);
  fx.feed(b);
  REQUIRE(fx.canister.anchor_height() == 3);
  const auto deep = fx.chain.extend(b[0], 1);
  const auto out = fx.feed(deep);
  CHECK(out.blocks_rejected == 1);
  CHECK(fx.canister.deep_fork_events() == 1);
  CHECK_FALSE(fx.canister.tree().contains(deep[0]));

  const auto deep_header = fx.chain.extend(b[1], 1);
  fx.feed({}, deep_header);
  CHECK(fx.canister.deep_fork_events() == 2);
}

TEST_CASE("invalid blocks are rejected") {
  Fixture fx;
  const auto g = fx.chain.genesis().hash();
  const auto b = fx.chain.extend(g, 2);
  // Child before its parent: parent body missing.
  auto out = fx.feed({b[1]});
  CHECK(out.blocks_rejected == 1);
  GetSuccessorsResponse r;
  Block tampered = fx.chain.block(b[0]);
  tampered.transactions[0].outputs[0].value = 1;
  r.blocks.push_back({tampered, tampered.header});
  CHECK(fx.canister.handle_response(r, fx.now()).blocks_rejected == 1);
  r.blocks = {{fx.chain.block(b[0]), fx.chain.block(b[1]).header}};
  CHECK(fx.canister.handle_response(r, fx.now()).blocks_rejected == 1);
  CHECK(fx.feed({b[0], b[1]}).blocks_accepted == 2);
}

TEST_CASE("synced gating") {
  Fixture fx;
  const auto g = fx.chain.genesis().hash();
  const auto b = fx.chain.extend(g, 6, alice());
  fx.feed({b[0]}, {b[1], b[2]});
  CHECK(fx.canister.synced());
  fx.feed({}, {b[3], b[4]});
  CHECK_FALSE(fx.canister.synced());

  CHECK(fx.canister.get_utxos(alice_address(), kNet).error() == ApiError::kUnavailable);
  CHECK(fx.canister.get_balance(alice_address(), kNet).error() == ApiError::kUnavailable);
  CHECK(fx.canister.send_transaction(Bytes{0}, kNet).error() == ApiError::kUnavailable);
  CHECK(fx.canister.get_utxos(alice_address(), kNet, UtxosFilter{MinConfirmations{1}}).error() ==
        ApiError::kUnavailable);

  fx.feed({b[1], b[2]});
  CHECK(fx.canister.synced());
}

TEST_CASE("api argument checks") {
  Fixture fx;
  const auto a = alice_address();
  CHECK(fx.canister.get_utxos(a, NetworkKind::kMainnet).error() == ApiError::kNetworkMismatch);
  CHECK(fx.canister.get_utxos(a, kNet, UtxosFilter{MinConfirmations{0}}).error() ==
        ApiError::kInvalidFilter);
  CHECK(fx.canister.get_utxos(a, kNet, UtxosFilter{MinConfirmations{3}}).error() ==
        ApiError::kTooManyConfirmations);
  CHECK(fx.canister.get_utxos(a, kNet, UtxosFilter{MinConfirmations{2}}));
  CHECK(fx.canister.get_utxos(a, kNet, UtxosFilter{PageToken{"zz"}}).error() ==
        ApiError::kInvalidPage);
  CHECK(fx.canister.get_utxos(a, kNet, UtxosFilter{PageToken{std::string(80, '0') + "00"}}).error() ==
        ApiError::kInvalidPage);
  CHECK(fx.canister.get_balance(a, kNet, 3).error() == ApiError::kTooManyConfirmations);
  CHECK(fx.canister.get_balance(a, kNet, 0).error() == ApiError::kInvalidFilter);
  CHECK(fx.canister.send_transaction(Bytes{1, 2, 3}, kNet).error() == ApiError::kMalformedTransaction);
  CHECK(to_string(ApiError::kTooManyConfirmations) == "too-many-confirmations");
}

TEST_CASE("utxos combine the stable set with unstable blocks") {
  Fixture fx(3);
  const auto g = fx.chain.genesis().hash();
  const auto b = fx.chain.extend(g, 4, alice());
  fx.feed(b);
  REQUIRE(fx.canister.anchor_height() == 2);

  auto res = fx.canister.get_utxos(alice_address(), kNet);
  REQUIRE(res);
  CHECK(res.value().utxos.size() == 4);
  CHECK(res.value().tip_height == 4);
  CHECK(res.value().utxos.front().height == 4);

  // Spend b1's coinbase in an unstable block.
  const OutPoint coin{fx.chain.block(b[0]).transactions[0].txid(), 0};
  const auto& b5 = fx.chain.mine(b[3], {testing::spend(coin, 100, testing::ChainBuilder::default_script())},
                                 alice());
  fx.feed({b5.hash()});
  res = fx.canister.get_utxos(alice_address(), kNet);
  REQUIRE(res);
  CHECK(res.value().utxos.size() == 4);
  for (const auto& u : res.value().utxos) CHECK(u.outpoint != coin);

  // min_confirmations selects a shorter chain.
  auto stable = fx.canister.get_utxos(alice_address(), kNet, UtxosFilter{MinConfirmations{2}});
  REQUIRE(stable);
  CHECK(stable.value().tip_height == 4);
  CHECK(stable.value().utxos.size() == 4);
  auto three = fx.canister.get_utxos(alice_address(), kNet, UtxosFilter{MinConfirmations{3}});
  REQUIRE(three);
  CHECK(three.value().tip_height == 3);
  CHECK(three.value().utxos.size() == 3);

  std::uint64_t sum = 0;
  for (const auto& u : res.value().utxos) sum += u.value;
  CHECK(fx.canister.get_balance(alice_address(), kNet).value() == sum);
}

TEST_CASE("pagination matches the unpaginated listing") {
  Fixture small(2, 3);
  Fixture large(2, 1000);
  const auto g = small.chain.genesis().hash();
  const auto b = small.chain.extend(g, 10, alice());
  small.feed(b);
  for (const auto& h : b) {
    GetSuccessorsResponse r{{{small.chain.block(h), small.chain.block(h).header}}, {}};
    large.canister.handle_response(r, small.now());
  }
  std::size_t pages = 0;
  const auto paged = all_pages(small.canister, alice_address(), &pages);
  const auto full = large.canister.get_utxos(alice_address(), kNet).value().utxos;
  CHECK(pages == 4);
  CHECK(paged == full);
  CHECK(std::is_sorted(paged.begin(), paged.end(), UtxoOrder{}));
  CHECK(large.canister.get_utxos(alice_address(), kNet).value().next_page == std::nullopt);
}

TEST_CASE("send_transaction queues for the adapter") {
  Fixture fx;
  const auto tx = testing::spend(OutPoint{Hash256::from_hex(std::string(64, 'c')), 1}, 5, alice());
  const auto raw = serialize_transaction(tx);
  const auto res = fx.canister.send_transaction(raw, kNet);
  REQUIRE(res);
  CHECK(res.value() == tx.txid());
  CHECK(fx.canister.outbound().size() == 1);
  const auto req = fx.canister.build_request();
  CHECK(req.transactions == std::vector<Bytes>{raw});
  CHECK(fx.canister.outbound().empty());
  CHECK(req.anchor == fx.chain.genesis().header);
}

TEST_CASE("snapshot round trip") {
  Fixture fx;
  const auto g = fx.chain.genesis().hash();
  const auto b = fx.chain.extend(g, 4, alice());
  const auto c = fx.chain.extend(b[2], 1);
  fx.feed(b);
  fx.feed(c);
  fx.canister.send_transaction(
      serialize_transaction(testing::spend(OutPoint{Hash256::from_hex(std::string(64, 'd')), 0}, 1, alice())),
      kNet);

  std::stringstream first;
  fx.canister.save(first);
  const auto loaded = Canister::load(first);
  std::stringstream second;
  loaded.save(second);
  CHECK(second.str() == first.str());
  CHECK(loaded.anchor() == fx.canister.anchor());
  CHECK(loaded.tip() == fx.canister.tip());
  CHECK(loaded.utxos().entries() == fx.canister.utxos().entries());
  CHECK(loaded.get_balance(alice_address(), kNet).value() ==
        fx.canister.get_balance(alice_address(), kNet).value());

  // Corruptions report their line.
  auto text = first.str();
  const auto pos = text.find("delta");
  text.insert(pos, "bogus 1\n");
  std::istringstream bad(text);
  try {
    (void)Canister::load(bad);
    FAIL("expected TreeFormatError");
  } catch (const TreeFormatError& e) {
    CHECK(std::string(e.what()).find("line 5") != std::string::npos);
  }
  std::istringstream truncated(first.str().substr(0, first.str().size() - 4));
  CHECK_THROWS_AS(Canister::load(truncated), TreeFormatError);
  std::istringstream wrong_version("btcsync-canister-snapshot 9\n");
  CHECK_THROWS_AS(Canister::load(wrong_version), TreeFormatError);
}
