#include "btcsync/block_tree.hpp"

#include <algorithm>
#include <deque>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace btcsync {

namespace {

void insert_sorted(std::vector<Hash256>& v, const Hash256& h) {
  v.insert(std::lower_bound(v.begin(), v.end(), h), h);
}

void erase_sorted(std::vector<Hash256>& v, const Hash256& h) {
  auto it = std::lower_bound(v.begin(), v.end(), h);
  if (it != v.end() && *it == h) v.erase(it);
}

}  // namespace

BlockTree::BlockTree(const BlockHeader& genesis, WorkPolicy policy) : policy_(policy) {
  root_ = genesis.hash();
  add_node(root_, genesis, std::nullopt);
}

void BlockTree::add_node(const Hash256& hash, const BlockHeader& header,
                         std::optional<Hash256> parent) {
  TreeNode n;
  n.hash = hash;
  n.header = header;
  n.parent = parent;
  n.work = header_work(header, policy_);
  n.depth_work = n.work;
  if (parent) {
    auto& p = mutable_node(*parent);
    n.height = p.height + 1;
    insert_sorted(p.children, hash);
  }
  insert_sorted(by_height_[n.height], hash);
  nodes_.emplace(hash, std::move(n));
  if (parent) refresh_depths_from(*parent);
}

void BlockTree::refresh_depths_from(const Hash256& start) {
  std::optional<Hash256> cur = start;
  while (cur) {
    auto& n = mutable_node(*cur);
    std::uint64_t best_c = 0;
    Work best_w;
    for (const auto& c : n.children) {
      const auto& child = nodes_.at(c);
      best_c = std::max(best_c, child.depth_confirmations);
      if (child.depth_work > best_w) best_w = child.depth_work;
    }
    const std::uint64_t new_c = 1 + best_c;
    const Work new_w = n.work + best_w;
    if (new_c == n.depth_confirmations && new_w == n.depth_work) break;
    n.depth_confirmations = new_c;
    n.depth_work = new_w;
    cur = n.parent;
  }
}

InsertOutcome BlockTree::insert(const BlockHeader& header) {
  const auto hash = header.hash();
  if (contains(hash)) return InsertOutcome::kDuplicate;
  if (!contains(header.prev)) return InsertOutcome::kOrphan;
  add_node(hash, header, header.prev);
  return InsertOutcome::kInserted;
}

bool BlockTree::attach_body(const Hash256& hash, Block body) {
  auto it = nodes_.find(hash);
  if (it == nodes_.end() || it->second.body) return false;
  it->second.body = std::move(body);
  return true;
}

void BlockTree::drop_body(const Hash256& hash) { mutable_node(hash).body.reset(); }

void BlockTree::remove_subtree(const Hash256& hash) {
  if (hash == root_) throw std::invalid_argument("cannot remove the root");
  const auto parent = *node(hash).parent;
  std::vector<Hash256> stack{hash};
  while (!stack.empty()) {
    const auto cur = stack.back();
    stack.pop_back();
    auto it = nodes_.find(cur);
    for (const auto& c : it->second.children) stack.push_back(c);
    auto level = by_height_.find(it->second.height);
    erase_sorted(level->second, cur);
    if (level->second.empty()) by_height_.erase(level);
    nodes_.erase(it);
  }
  erase_sorted(mutable_node(parent).children, hash);
  refresh_depths_from(parent);
}

const TreeNode* BlockTree::find(const Hash256& hash) const {
  auto it = nodes_.find(hash);
  return it == nodes_.end() ? nullptr : &it->second;
}

const TreeNode& BlockTree::node(const Hash256& hash) const {
  auto it = nodes_.find(hash);
  if (it == nodes_.end()) throw UnknownBlockError(hash);
  return it->second;
}

TreeNode& BlockTree::mutable_node(const Hash256& hash) {
  auto it = nodes_.find(hash);
  if (it == nodes_.end()) throw UnknownBlockError(hash);
  return it->second;
}

std::uint32_t BlockTree::max_height() const { return by_height_.rbegin()->first; }

const std::vector<Hash256>& BlockTree::at_height(std::uint32_t height) const {
  static const std::vector<Hash256> kEmpty;
  auto it = by_height_.find(height);
  return it == by_height_.end() ? kEmpty : it->second;
}

std::optional<Hash256> BlockTree::ancestor_at(const Hash256& hash, std::uint32_t height) const {
  const TreeNode* n = find(hash);
  if (!n || n->height < height) return std::nullopt;
  while (n->height > height) n = &nodes_.at(*n->parent);
  return n->hash;
}

bool BlockTree::is_ancestor(const Hash256& ancestor, const Hash256& descendant) const {
  const TreeNode* a = find(ancestor);
  if (!a) return false;
  auto at = ancestor_at(descendant, a->height);
  return at && *at == ancestor;
}

std::vector<Hash256> BlockTree::bfs_order() const {
  std::vector<Hash256> out;
  out.reserve(nodes_.size());
  out.push_back(root_);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& n = nodes_.at(out[i]);
    out.insert(out.end(), n.children.begin(), n.children.end());
  }
  return out;
}

void BlockTree::dump(std::ostream& out) const {
  for (const auto& h : bfs_order()) {
    const auto& n = nodes_.at(h);
    out << n.hash.to_hex() << ' ' << (n.parent ? n.parent->to_hex() : std::string("-")) << ' '
        << n.height << ' ' << std::hex << std::setw(8) << std::setfill('0') << n.header.bits
        << std::dec << std::setfill(' ') << ' ' << (n.has_body() ? 1 : 0) << '\n';
  }
}

BlockTree BlockTree::from_dump(std::istream& in, WorkPolicy policy) {
  BlockTree tree;
  tree.policy_ = policy;
  bool have_root = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string hash_hex, prev_hex, bits_hex;
    std::uint32_t height = 0;
    int has_block = 0;
    if (!(fields >> hash_hex >> prev_hex >> height >> bits_hex >> has_block)) {
      throw TreeFormatError("line " + std::to_string(line_no) + ": expected 5 fields");
    }
    const auto at_line = [&](const std::string& msg) {
      return TreeFormatError("line " + std::to_string(line_no) + ": " + msg);
    };
    Hash256 hash;
    BlockHeader header;
    try {
      hash = Hash256::from_hex(hash_hex);
      header.bits = static_cast<std::uint32_t>(std::stoul(bits_hex, nullptr, 16));
      if (prev_hex != "-") header.prev = Hash256::from_hex(prev_hex);
    } catch (const std::exception& e) {
      throw at_line(e.what());
    }
    if (!CompactTarget::expand(header.bits)) throw at_line("malformed bits");
    if (tree.contains(hash)) throw at_line("duplicate node (cycle) " + hash_hex);
    if (prev_hex == "-") {
      if (have_root) throw at_line("second root");
      if (height != 0) throw at_line("root height must be 0");
      tree.root_ = hash;
      tree.add_node(hash, header, std::nullopt);
      have_root = true;
      continue;
    }
    if (!have_root) throw at_line("first node must be the root");
    const auto* parent = tree.find(header.prev);
    if (!parent) throw at_line("orphaned node, unknown parent " + prev_hex);
    if (parent->height + 1 != height) throw at_line("height does not match parent");
    tree.add_node(hash, header, header.prev);
  }
  if (!have_root) throw TreeFormatError("empty tree dump");
  return tree;
}

}  // namespace btcsync
