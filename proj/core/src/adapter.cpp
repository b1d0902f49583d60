#include "btcsync/adapter.hpp"

#include <algorithm>

#include "btcsync/serialize.hpp"

namespace btcsync {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr int kDiscoveryRounds = 8;

}  // namespace

AdapterConfig AdapterConfig::for_network(NetworkKind network) {
  AdapterConfig c;
  switch (network) {
    case NetworkKind::kMainnet:
      c.addr_low = 500;
      c.addr_high = 2000;
      break;
    case NetworkKind::kTestnet:
      c.addr_low = 100;
      c.addr_high = 1000;
      break;
    case NetworkKind::kRegtest:
      c.addr_low = 1;
      c.addr_high = 1;
      c.skip_discovery = true;
      break;
  }
  return c;
}

SuccessorSelection assemble_successors(const BlockTree& headers, const BodyLookup& bodies,
                                       const Hash256& anchor, const HashSet& processed,
                                       const SuccessorLimits& limits) {
  const auto& anchor_node = headers.node(anchor);
  const std::size_t max_blocks = anchor_node.height >= limits.checkpoint_height
                                     ? 1
                                     : std::numeric_limits<std::size_t>::max();
  SuccessorSelection out;
  auto& response = out.response;
  HashSet included;
  std::size_t total_size = 0;

  std::vector<Hash256> queue{anchor};
  for (std::size_t i = 0; i < queue.size() && response.next_headers.size() < limits.max_headers;
       ++i) {
    const auto& cur = headers.node(queue[i]);
    queue.insert(queue.end(), cur.children.begin(), cur.children.end());
    if (cur.hash == anchor || processed.contains(cur.hash)) continue;

    const Hash256& prev = *cur.parent;
    const bool parent_available =
        prev == anchor || processed.contains(prev) || included.contains(prev);
    const Block* body = bodies(cur.hash);
    if (!body) out.missing.push_back(cur.hash);

    if (parent_available && body && total_size < limits.max_size_bytes &&
        response.blocks.size() < max_blocks) {
      response.blocks.push_back(SuccessorBlock{*body, cur.header});
      included.insert(cur.hash);
      total_size += serialized_size(*body);
      continue;
    }
    response.next_headers.push_back(cur.header);
  }
  return out;
}

Adapter::Adapter(AdapterConfig config, ChainParams params, const BlockHeader& genesis,
                 std::uint64_t seed)
    : config_(std::move(config)),
      params_(std::move(params)),
      headers_(genesis, params_.work_policy),
      rng_(seed) {}

void Adapter::send(PeerId peer, WireMessage message) {
  outbox_.push_back(Envelope{peer, std::move(message)});
}

std::vector<Envelope> Adapter::take_outbox() { return std::exchange(outbox_, {}); }

std::vector<Hash256> Adapter::locator() const {
  std::vector<Hash256> out;
  const auto& top = headers_.at_height(headers_.max_height());
  const TreeNode* n = &headers_.node(top.front());
  std::uint32_t step = 1;
  while (true) {
    out.push_back(n->hash);
    if (!n->parent) break;
    if (out.size() >= 10) step *= 2;
    const std::uint32_t target = n->height > step ? n->height - step : 0;
    n = &headers_.node(*headers_.ancestor_at(n->hash, target));
  }
  return out;
}

void Adapter::add_peer(PeerId peer) {
  peers_.insert(peer);
  send(peer, GetHeadersMsg{locator()});
  for (const auto& e : tx_cache_) send(peer, InvMsg{{InvItem{InvType::kTx, e.txid}}});
}

void Adapter::discover_peers(PeerDirectory& directory) {
  if (config_.skip_discovery) {
    for (auto p : config_.preconfigured_peers) {
      if (!peers_.contains(p) && directory.connect(p)) add_peer(p);
    }
    return;
  }
  if (pool_.size() < config_.addr_low) discovering_ = true;
  if (discovering_) {
    for (int round = 0; round < kDiscoveryRounds && pool_.size() < config_.addr_high; ++round) {
      std::size_t added = 0;
      for (auto a : directory.request_addresses(config_.addr_high - pool_.size())) {
        if (pool_.size() >= config_.addr_high) break;
        if (!peers_.contains(a) && pool_.insert(a).second) ++added;
      }
      if (added == 0) break;
    }
    // Stays in discovery until t_u addresses were collected; service continues meanwhile.
    if (pool_.size() >= config_.addr_high) discovering_ = false;
  }
  while (peers_.size() < config_.target_connections && !pool_.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, pool_.size() - 1);
    auto it = std::next(pool_.begin(), static_cast<std::ptrdiff_t>(pick(rng_)));
    const PeerId p = *it;
    pool_.erase(it);
    if (directory.connect(p)) add_peer(p);
  }
}

void Adapter::on_peer_disconnected(PeerId peer) { peers_.erase(peer); }

void Adapter::penalize(PeerId peer, PeerDirectory& directory) {
  ++penalties_;
  peers_.erase(peer);
  discover_peers(directory);
}

AcceptResult Adapter::accept_header(const BlockHeader& header, SimTime now) {
  if (headers_.contains(header.hash())) return {AcceptStatus::kDuplicate, std::nullopt};
  auto verdict = validate_header(header, headers_, params_, unix_seconds(now));
  if (!verdict) return {AcceptStatus::kRejected, verdict.violation()};
  headers_.insert(header);
  return {AcceptStatus::kAccepted, std::nullopt};
}

bool Adapter::offer_block(const Block& block) {
  const auto hash = block.hash();
  if (!headers_.contains(hash)) return false;
  if (!check_block_structure(block) || block_merkle_root(block) != block.header.merkle_root)
    return false;
  pending_.erase(hash);
  blocks_.try_emplace(hash, block);
  return true;
}

void Adapter::schedule_fetch(const Hash256& hash, SimTime now) {
  if (auto it = pending_.find(hash); it != pending_.end() && now - it->second < config_.fetch_retry)
    return;
  if (peers_.empty()) return;
  PeerId target;
  if (auto o = header_origin_.find(hash); o != header_origin_.end() && peers_.contains(o->second)) {
    target = o->second;
  } else {
    target = *std::next(peers_.begin(), static_cast<std::ptrdiff_t>(round_robin_++ % peers_.size()));
  }
  send(target, GetDataMsg{{InvItem{InvType::kBlock, hash}}});
  pending_[hash] = now;
}

void Adapter::cache_transaction(Transaction tx, SimTime now) {
  const auto txid = tx.txid();
  const bool known = std::any_of(tx_cache_.begin(), tx_cache_.end(),
                                 [&](const TxCacheEntry& e) { return e.txid == txid; });
  if (known) return;
  for (auto p : peers_) send(p, InvMsg{{InvItem{InvType::kTx, txid}}});
  tx_cache_.push_back(TxCacheEntry{std::move(tx), txid, now, {}});
}

GetSuccessorsResponse Adapter::handle_request(const GetSuccessorsRequest& request, SimTime now) {
  const auto anchor = request.anchor.hash();
  const auto& anchor_node = headers_.node(anchor);

  for (const auto& raw : request.transactions) {
    try {
      cache_transaction(deserialize_transaction(raw), now);
    } catch (const DeserializeError&) {
      // The canister only forwards parsed transactions; ignore anything else.
    }
  }

  std::erase_if(blocks_, [&](const auto& kv) {
    const auto* n = headers_.find(kv.first);
    return n && n->height <= anchor_node.height;
  });

  const HashSet processed(request.processed.begin(), request.processed.end());
  const BodyLookup lookup = [this](const Hash256& h) -> const Block* {
    auto it = blocks_.find(h);
    return it == blocks_.end() ? nullptr : &it->second;
  };
  auto selection = assemble_successors(
      headers_, lookup, anchor, processed,
      SuccessorLimits{config_.max_headers, config_.max_size_bytes, config_.checkpoint_height});
  for (const auto& h : selection.missing) schedule_fetch(h, now);
  return std::move(selection.response);
}

void Adapter::tick_tx_cache(SimTime now) {
  std::erase_if(tx_cache_, [&](const TxCacheEntry& e) {
    if (now - e.inserted_at > config_.tx_expiry) return true;
    return !peers_.empty() && std::includes(e.delivered_to.begin(), e.delivered_to.end(),
                                            peers_.begin(), peers_.end());
  });
  for (const auto& e : tx_cache_) {
    for (auto p : peers_) {
      if (!e.delivered_to.contains(p)) send(p, InvMsg{{InvItem{InvType::kTx, e.txid}}});
    }
  }
}

void Adapter::on_peer_message(PeerId from, const WireMessage& message, SimTime now,
                              PeerDirectory& directory) {
  if (!peers_.contains(from)) return;
  std::visit(
      Overloaded{
          [&](const HeadersMsg& m) {
            if (m.headers.size() > config_.max_headers_per_message) {
              penalize(from, directory);
              return;
            }
            std::size_t fresh = 0;
            for (const auto& h : m.headers) {
              const auto r = accept_header(h, now);
              if (r.status == AcceptStatus::kAccepted) {
                header_origin_[h.hash()] = from;
                ++fresh;
              } else if (r.status == AcceptStatus::kRejected) {
                if (r.violation == Violation::kOrphan) {
                  send(from, GetHeadersMsg{locator()});
                  return;
                }
                penalize(from, directory);
                return;
              }
            }
            if (fresh > 0 && m.headers.size() == config_.max_headers_per_message)
              send(from, GetHeadersMsg{locator()});
          },
          [&](const InvMsg& m) {
            bool unknown_block = false;
            for (const auto& item : m.items) {
              if (item.type == InvType::kBlock) {
                unknown_block |= !headers_.contains(item.hash);
                continue;
              }
              for (auto& e : tx_cache_)
                if (e.txid == item.hash) e.delivered_to.insert(from);
            }
            // Headers first: an unknown block is requested through its header.
            if (unknown_block) send(from, GetHeadersMsg{locator()});
          },
          [&](const GetDataMsg& m) {
            for (const auto& item : m.items) {
              if (item.type != InvType::kTx) continue;
              for (auto& e : tx_cache_) {
                if (e.txid != item.hash) continue;
                send(from, TxMsg{e.tx});
                e.delivered_to.insert(from);
              }
            }
          },
          [&](const BlockMsg& m) {
            if (!headers_.contains(m.block.hash())) return;
            if (!offer_block(m.block)) penalize(from, directory);
          },
          [&](const AddrMsg& m) {
            for (auto a : m.addresses) {
              if (pool_.size() >= config_.addr_high) break;
              if (!peers_.contains(a)) pool_.insert(a);
            }
          },
          [](const GetHeadersMsg&) {},
          [](const TxMsg&) {},
      },
      message);
}

}  // namespace btcsync
