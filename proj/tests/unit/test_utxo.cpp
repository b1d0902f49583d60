#include <doctest.h>

#include "btcsync/address.hpp"
#include "btcsync/utxo_set.hpp"
#include "support.hpp"

using namespace btcsync;

TEST_CASE("address encodings") {
  Hash160 h{};
  const auto bytes = from_hex("751e76e8199196d454941c45d1b3a323f1433bd6");
  std::copy(bytes.begin(), bytes.end(), h.begin());

  CHECK(address_of_script(p2pkh_script(h), NetworkKind::kMainnet) ==
        "1BgGZ9tcN4rm9KBzDn7KprQz87SZ26SAMH");
  CHECK(address_of_script(p2pkh_script(h), NetworkKind::kTestnet) ==
        "mrCDrCybB6J1vRfbwM5hemdJz73FwDBC8r");
  CHECK(address_of_script(p2pkh_script(h), NetworkKind::kRegtest) ==
        "mrCDrCybB6J1vRfbwM5hemdJz73FwDBC8r");
  CHECK(address_of_script(p2sh_script(h), NetworkKind::kMainnet) ==
        "3CNHUhP3uyB9EUtRLsmvFUmvGdjGdkTxJw");
  CHECK(address_of_script(p2sh_script(h), NetworkKind::kTestnet) ==
        "2N3vVYSK5XRgVSGWy21PnsRmBUywSQNdCsf");
  CHECK(address_of_script(p2wpkh_script(h), NetworkKind::kMainnet) ==
        "bc1qw508d6qejxtdg4y5r3zarvary0c5xw7kv8f3t4");
  CHECK(address_of_script(p2wpkh_script(h), NetworkKind::kTestnet) ==
        "tb1qw508d6qejxtdg4y5r3zarvary0c5xw7kxpjzsx");
  CHECK(address_of_script(p2wpkh_script(h), NetworkKind::kRegtest) ==
        "bcrt1qw508d6qejxtdg4y5r3zarvary0c5xw7kygt080");

  CHECK(base58check_encode(Bytes(21, 0)) == "1111111111111111111114oLvT2");

  const Bytes op_return{0x6a, 0x01, 0x02};
  const auto other = address_of_script(op_return, NetworkKind::kMainnet);
  CHECK(other == "script:" + sha256d(op_return).to_hex());
}

TEST_CASE("utxo set indexes stay consistent") {
  UtxoSet set(NetworkKind::kRegtest);
  const auto script = testing::ChainBuilder::default_script();
  const auto address = address_of_script(script, NetworkKind::kRegtest);
  const auto txid = [](char c) { return Hash256::from_hex(std::string(64, c)); };

  set.insert(OutPoint{txid('1'), 0}, TxOut{10, script}, 5);
  set.insert(OutPoint{txid('2'), 1}, TxOut{20, script}, 7);
  set.insert(OutPoint{txid('1'), 2}, TxOut{30, script}, 7);
  CHECK(set.is_consistent());

  const auto list = set.for_address(address);
  REQUIRE(list.size() == 3);
  // Height descending, then outpoint.
  CHECK(list[0].outpoint == OutPoint{txid('1'), 2});
  CHECK(list[1].outpoint == OutPoint{txid('2'), 1});
  CHECK(list[2].height == 5);
  CHECK(std::is_sorted(list.begin(), list.end(), UtxoOrder{}));

  CHECK(set.erase(OutPoint{txid('2'), 1}));
  CHECK_FALSE(set.erase(OutPoint{txid('2'), 1}));
  CHECK(set.for_address(address).size() == 2);
  CHECK(set.is_consistent());
  CHECK(set.find(OutPoint{txid('1'), 0})->output.value == 10);
  CHECK(set.for_address("nobody").empty());
}

TEST_CASE("process_block spends then creates") {
  testing::ChainBuilder chain;
  const auto& b1 = chain.mine(chain.genesis().hash());
  const OutPoint coin{b1.transactions[0].txid(), 0};
  const auto t1 = testing::spend(coin, 7, testing::ChainBuilder::default_script());
  // Spends an output created earlier in the same block.
  const auto t2 = testing::spend(OutPoint{t1.txid(), 0}, 6, testing::ChainBuilder::default_script());
  const auto& b2 = chain.mine(b1.hash(), {t1, t2});

  UtxoSet set(NetworkKind::kRegtest);
  process_block(set, chain.genesis(), 0);
  process_block(set, b1, 1);
  const auto stats = process_block(set, b2, 2);
  CHECK(stats.removed == 2);
  CHECK(stats.inserted == 3);
  CHECK(stats.missing_inputs == 0);
  CHECK(set.size() == 3);
  CHECK(set.is_consistent());

  const auto oracle = testing::replay_chain({&chain.genesis(), &b1, &b2});
  CHECK(set.entries() == oracle);

  // Unknown inputs are counted, never validated.
  const auto& b3 = chain.mine(b2.hash(), {testing::spend(OutPoint{Hash256::from_hex(std::string(64, 'e')), 0},
                                                         1, testing::ChainBuilder::default_script())});
  CHECK(process_block(set, b3, 3).missing_inputs == 1);
}
