#include "btcsync/canister.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "btcsync/address.hpp"
#include "btcsync/serialize.hpp"
#include "btcsync/stability.hpp"

namespace btcsync {

namespace {

constexpr std::string_view kSnapshotMagic = "btcsync-canister-snapshot";
constexpr int kSnapshotVersion = 1;

std::string encode_token(const Utxo& last) {
  ByteWriter w;
  w.u32(last.height);
  w.hash(last.outpoint.txid);
  w.u32(last.outpoint.vout);
  return to_hex(w.bytes());
}

std::optional<Utxo> decode_token(const std::string& token) {
  try {
    const auto raw = from_hex(token);
    if (raw.size() != 40) return std::nullopt;
    ByteReader r(raw);
    Utxo u;
    u.height = r.u32();
    u.outpoint.txid = r.hash();
    u.outpoint.vout = r.u32();
    return u;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

const auto kAnyChild = [](const TreeNode&) { return true; };

}  // namespace

std::string_view to_string(ApiError e) {
  switch (e) {
    case ApiError::kUnavailable: return "unavailable";
    case ApiError::kNetworkMismatch: return "network-mismatch";
    case ApiError::kTooManyConfirmations: return "too-many-confirmations";
    case ApiError::kInvalidFilter: return "invalid-filter";
    case ApiError::kInvalidPage: return "invalid-page";
    case ApiError::kMalformedTransaction: return "malformed-transaction";
  }
  return "unknown";
}

Canister::Canister(CanisterConfig config, ChainParams params, const Block& genesis)
    : config_(config),
      params_(std::move(params)),
      tree_(genesis.header, params_.work_policy),
      utxos_(config.network),
      anchor_(genesis.hash()),
      last_tip_(anchor_) {
  anomalies_ += process_block(utxos_, genesis, 0).missing_inputs;
}

GetSuccessorsRequest Canister::build_request() {
  GetSuccessorsRequest req;
  req.anchor = tree_.node(anchor_).header;
  for (auto h = anchor_height() + 1; h <= tree_.max_height(); ++h) {
    for (const auto& hash : tree_.at_height(h))
      if (tree_.node(hash).has_body()) req.processed.push_back(hash);
  }
  req.transactions.assign(std::make_move_iterator(outbound_.begin()),
                          std::make_move_iterator(outbound_.end()));
  outbound_.clear();
  return req;
}

ResponseOutcome Canister::handle_response(const GetSuccessorsResponse& response, SimTime now) {
  ResponseOutcome out;
  const auto now_s = unix_seconds(now);

  for (const auto& [block, header] : response.blocks) {
    const auto hash = header.hash();
    if (block.header != header) {
      ++out.blocks_rejected;
      continue;
    }
    if (const auto* existing = tree_.find(hash);
        existing && (existing->has_body() || existing->height <= anchor_height())) {
      continue;
    }
    if (const auto* parent = tree_.find(header.prev);
        parent && parent->height < anchor_height()) {
      ++deep_fork_events_;
      ++out.blocks_rejected;
      continue;
    }
    if (!validate_block(block, tree_, params_, now_s, anchor_)) {
      ++out.blocks_rejected;
      continue;
    }
    tree_.insert(header);
    tree_.attach_body(hash, block);
    ++out.blocks_accepted;
    ++blocks_ingested_;
    const auto before = anchor_height();
    advance_anchor();
    out.anchor_advances += anchor_height() - before;
  }

  for (const auto& header : response.next_headers) {
    if (tree_.contains(header.hash())) continue;
    if (!validate_header(header, tree_, params_, now_s)) {
      ++out.headers_rejected;
      continue;
    }
    if (tree_.node(header.prev).height < anchor_height()) {
      ++deep_fork_events_;
      ++out.headers_rejected;
      continue;
    }
    tree_.insert(header);
    ++out.headers_accepted;
  }

  track_reorg();
  refresh_synced();
  return out;
}

bool Canister::next_is_stable(const TreeNode& candidate) const {
  const WorkDelta threshold = WorkDelta(tree_.node(anchor_).work.amount()) * config_.delta;
  const WorkDelta own(candidate.depth_work.amount());
  if (own < threshold) return false;
  if (config_.rule == StabilityRule::kRatioOnly) return true;
  for (const auto& rival : tree_.at_height(candidate.height)) {
    if (rival == candidate.hash) continue;
    if (own - WorkDelta(tree_.node(rival).depth_work.amount()) < threshold) return false;
  }
  return true;
}

void Canister::advance_anchor() {
  while (true) {
    const auto next = heaviest_child(tree_, anchor_, [](const TreeNode& n) { return n.has_body(); });
    if (!next) return;
    const auto& candidate = tree_.node(*next);
    if (!next_is_stable(candidate)) return;

    const Block body = *candidate.body;
    const auto height = candidate.height;
    anchor_ = *next;
    anomalies_ += process_block(utxos_, body, height).missing_inputs;
    tree_.drop_body(anchor_);
    const auto rivals = tree_.at_height(height);
    for (const auto& r : rivals)
      if (r != anchor_) tree_.remove_subtree(r);
  }
}

void Canister::refresh_synced() {
  const auto max_h = tree_.max_height();
  std::uint32_t max_body = anchor_height();
  for (auto h = max_h; h > anchor_height(); --h) {
    const auto& level = tree_.at_height(h);
    if (std::any_of(level.begin(), level.end(),
                    [&](const Hash256& x) { return tree_.node(x).has_body(); })) {
      max_body = h;
      break;
    }
  }
  synced_ = max_h - max_body <= config_.tau;
}

Hash256 Canister::tip() const { return select_chain(std::nullopt).tip; }

void Canister::track_reorg() {
  const auto current = tip();
  if (current != last_tip_ && !tree_.is_ancestor(last_tip_, current)) ++reorgs_;
  last_tip_ = current;
}

Canister::ChainView Canister::select_chain(std::optional<std::uint64_t> min_confirmations) const {
  ChainView view;
  Hash256 cur = anchor_;
  while (auto next = heaviest_child(tree_, cur, kAnyChild)) {
    const auto& n = tree_.node(*next);
    if (!n.has_body()) break;
    if (min_confirmations &&
        !is_delta_stable(tree_, *next, *min_confirmations, DepthKind::kConfirmation))
      break;
    view.blocks.push_back(*next);
    cur = *next;
  }
  view.tip = cur;
  view.tip_height = tree_.node(cur).height;
  return view;
}

std::vector<Utxo> Canister::collect_utxos(const std::string& address,
                                          const ChainView& view) const {
  std::map<OutPoint, Utxo> created;
  std::set<OutPoint> spent;
  for (const auto& hash : view.blocks) {
    const auto& n = tree_.node(hash);
    for (const auto& tx : n.body->transactions) {
      if (!tx.is_coinbase()) {
        for (const auto& in : tx.inputs)
          if (created.erase(in.prevout) == 0) spent.insert(in.prevout);
      }
      const auto txid = tx.txid();
      for (std::uint32_t i = 0; i < tx.outputs.size(); ++i) {
        if (address_of_script(tx.outputs[i].script_pubkey, config_.network) != address) continue;
        const OutPoint op{txid, i};
        created[op] = Utxo{op, tx.outputs[i].value, n.height};
      }
    }
  }
  std::vector<Utxo> out;
  for (auto& u : utxos_.for_address(address))
    if (!spent.contains(u.outpoint) && !created.contains(u.outpoint)) out.push_back(u);
  for (auto& [op, u] : created) out.push_back(u);
  std::sort(out.begin(), out.end(), UtxoOrder{});
  return out;
}

std::optional<ApiError> Canister::check_api(NetworkKind network) const {
  if (network != config_.network) return ApiError::kNetworkMismatch;
  if (!synced_) return ApiError::kUnavailable;
  return std::nullopt;
}

ApiResult<UtxosPage> Canister::get_utxos(const std::string& address, NetworkKind network,
                                         const std::optional<UtxosFilter>& filter) const {
  if (auto e = check_api(network)) return *e;
  std::optional<std::uint64_t> min_conf;
  std::optional<Utxo> after;
  if (filter) {
    if (const auto* c = std::get_if<MinConfirmations>(&*filter)) {
      if (c->value == 0) return ApiError::kInvalidFilter;
      if (c->value > config_.delta) return ApiError::kTooManyConfirmations;
      min_conf = c->value;
    } else {
      after = decode_token(std::get<PageToken>(*filter).token);
      if (!after) return ApiError::kInvalidPage;
    }
  }
  const auto view = select_chain(min_conf);
  const auto all = collect_utxos(address, view);

  auto first = after ? std::upper_bound(all.begin(), all.end(), *after, UtxoOrder{}) : all.begin();
  const auto available = static_cast<std::size_t>(all.end() - first);
  const auto take = std::min(available, config_.page_size);

  UtxosPage page;
  page.utxos.assign(first, first + static_cast<std::ptrdiff_t>(take));
  page.tip_hash = view.tip;
  page.tip_height = view.tip_height;
  if (take < available) page.next_page = encode_token(page.utxos.back());
  return page;
}

ApiResult<std::uint64_t> Canister::get_balance(const std::string& address, NetworkKind network,
                                               std::optional<std::uint64_t> min_confirmations) const {
  if (auto e = check_api(network)) return *e;
  if (min_confirmations) {
    if (*min_confirmations == 0) return ApiError::kInvalidFilter;
    if (*min_confirmations > config_.delta) return ApiError::kTooManyConfirmations;
  }
  std::uint64_t total = 0;
  for (const auto& u : collect_utxos(address, select_chain(min_confirmations))) total += u.value;
  return total;
}

ApiResult<Hash256> Canister::send_transaction(ByteSpan tx_bytes, NetworkKind network) {
  if (auto e = check_api(network)) return *e;
  try {
    const auto tx = deserialize_transaction(tx_bytes);
    outbound_.emplace_back(tx_bytes.begin(), tx_bytes.end());
    return tx.txid();
  } catch (const DeserializeError&) {
    return ApiError::kMalformedTransaction;
  }
}

void Canister::save(std::ostream& out) const {
  out << kSnapshotMagic << ' ' << kSnapshotVersion << '\n';
  out << "network " << to_string(config_.network) << '\n';
  out << "chain " << to_string(params_.network) << '\n';
  out << "work_policy " << (params_.work_policy == WorkPolicy::kHash ? "hash" : "target") << '\n';
  out << "delta " << config_.delta << '\n';
  out << "tau " << config_.tau << '\n';
  out << "page_size " << config_.page_size << '\n';
  out << "rule " << (config_.rule == StabilityRule::kRatioOnly ? "ratio" : "full") << '\n';
  out << "counters " << blocks_ingested_ << ' ' << reorgs_ << ' ' << anomalies_ << ' '
      << deep_fork_events_ << '\n';
  for (const auto& h : tree_.bfs_order()) {
    const auto& n = tree_.node(h);
    out << "header " << header_to_hex(n.header) << '\n';
    if (n.body) out << "body " << to_hex(serialize_block(*n.body)) << '\n';
  }
  out << "anchor " << anchor_.to_hex() << '\n';
  out << "last_tip " << last_tip_.to_hex() << '\n';
  for (const auto& [op, e] : utxos_.entries()) {
    out << "utxo " << op.txid.to_hex() << ' ' << op.vout << ' ' << e.output.value << ' '
        << e.height << ' '
        << (e.output.script_pubkey.empty() ? std::string("-") : to_hex(e.output.script_pubkey))
        << '\n';
  }
  for (const auto& tx : outbound_) out << "outbound " << to_hex(tx) << '\n';
  out << "end\n";
}

Canister Canister::load(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& msg) {
    return TreeFormatError("snapshot line " + std::to_string(line_no) + ": " + msg);
  };

  CanisterConfig config;
  std::optional<ChainParams> params;
  WorkPolicy policy = WorkPolicy::kTarget;
  std::optional<Canister> c;
  std::uint64_t counters[4] = {0, 0, 0, 0};
  bool header_seen = false, ended = false;
  Hash256 anchor, last_tip;
  std::vector<std::tuple<OutPoint, TxOut, std::uint32_t>> utxos;
  std::deque<Bytes> outbound;
  std::optional<Hash256> last_header;

  if (!std::getline(in, line)) throw TreeFormatError("empty snapshot");
  ++line_no;
  {
    std::istringstream first(line);
    std::string magic;
    int version = 0;
    if (!(first >> magic >> version) || magic != kSnapshotMagic)
      throw fail("not a canister snapshot");
    if (version != kSnapshotVersion) throw fail("unsupported snapshot version");
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream f(line);
    std::string key;
    f >> key;
    try {
      if (key == "network" || key == "chain") {
        std::string name;
        f >> name;
        auto n = parse_network(name);
        if (!n) throw fail("unknown network " + name);
        if (key == "network") {
          config.network = *n;
        } else {
          params = ChainParams::for_network(*n);
        }
      } else if (key == "work_policy") {
        std::string p;
        f >> p;
        policy = p == "hash" ? WorkPolicy::kHash : WorkPolicy::kTarget;
      } else if (key == "delta") {
        f >> config.delta;
      } else if (key == "tau") {
        f >> config.tau;
      } else if (key == "page_size") {
        f >> config.page_size;
      } else if (key == "rule") {
        std::string r;
        f >> r;
        config.rule = r == "ratio" ? StabilityRule::kRatioOnly : StabilityRule::kFullDefinition;
      } else if (key == "counters") {
        f >> counters[0] >> counters[1] >> counters[2] >> counters[3];
      } else if (key == "header") {
        std::string hex;
        f >> hex;
        const auto header = header_from_hex(hex);
        if (!header_seen) {
          if (!params) throw fail("chain must precede headers");
          params->work_policy = policy;
          Block genesis;
          genesis.header = header;
          c.emplace(Canister(config, *params, genesis));
          c->tree_ = BlockTree(header, policy);
          header_seen = true;
        } else if (c->tree_.insert(header) == InsertOutcome::kOrphan) {
          throw fail("header with unknown parent");
        }
        last_header = header.hash();
      } else if (key == "body") {
        std::string hex;
        f >> hex;
        if (!c || !last_header) throw fail("body before header");
        auto block = deserialize_block(from_hex(hex));
        if (block.hash() != *last_header) throw fail("body does not match preceding header");
        c->tree_.attach_body(*last_header, std::move(block));
      } else if (key == "anchor") {
        std::string hex;
        f >> hex;
        anchor = Hash256::from_hex(hex);
      } else if (key == "last_tip") {
        std::string hex;
        f >> hex;
        last_tip = Hash256::from_hex(hex);
      } else if (key == "utxo") {
        std::string txid, script;
        OutPoint op;
        TxOut out;
        std::uint32_t height = 0;
        if (!(f >> txid >> op.vout >> out.value >> height >> script)) throw fail("bad utxo line");
        op.txid = Hash256::from_hex(txid);
        if (script != "-") out.script_pubkey = from_hex(script);
        utxos.emplace_back(op, std::move(out), height);
      } else if (key == "outbound") {
        std::string hex;
        f >> hex;
        outbound.push_back(from_hex(hex));
      } else if (key == "end") {
        ended = true;
        break;
      } else {
        throw fail("unknown record " + key);
      }
    } catch (const TreeFormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw fail(e.what());
    }
  }
  if (!ended) throw TreeFormatError("snapshot truncated: missing end marker");
  if (!c) throw TreeFormatError("snapshot has no headers");
  if (!c->tree_.contains(anchor)) throw TreeFormatError("anchor not in header tree");

  c->utxos_ = UtxoSet(config.network);
  for (auto& [op, out, height] : utxos) c->utxos_.insert(op, std::move(out), height);
  c->anchor_ = anchor;
  c->last_tip_ = c->tree_.contains(last_tip) ? last_tip : anchor;
  c->outbound_ = std::move(outbound);
  c->blocks_ingested_ = counters[0];
  c->reorgs_ = counters[1];
  c->anomalies_ = counters[2];
  c->deep_fork_events_ = counters[3];
  c->refresh_synced();
  return std::move(*c);
}

}  // namespace btcsync
