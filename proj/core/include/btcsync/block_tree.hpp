#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "btcsync/chain_params.hpp"
#include "btcsync/primitives.hpp"
#include "btcsync/work.hpp"

namespace btcsync {

class UnknownBlockError : public std::out_of_range {
 public:
  explicit UnknownBlockError(const Hash256& hash)
      : std::out_of_range("unknown block " + hash.to_hex()) {}
};

class TreeFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TreeNode {
  Hash256 hash;
  BlockHeader header;
  std::optional<Hash256> parent;
  std::uint32_t height = 0;
  Work work;
  /// Sorted ascending by hash.
  std::vector<Hash256> children;
  std::optional<Block> body;
  // Memoized depths; kept exact by BlockTree on every mutation.
  std::uint64_t depth_confirmations = 1;
  Work depth_work;

  bool has_body() const { return body.has_value(); }
};

enum class InsertOutcome { kInserted, kDuplicate, kOrphan };

/// Rooted tree of headers with optional block bodies.
///
/// Depth under both cost functions is memoized per node. Insertions and
/// removals refresh the memo along the ancestor path only, stopping at the
/// first ancestor whose depths are unchanged. Single writer; readers may
/// share a const tree between mutations.
class BlockTree {
 public:
  explicit BlockTree(const BlockHeader& genesis, WorkPolicy policy = WorkPolicy::kTarget);

  /// Line format: `<hash> <prev|-> <height> <bits> <has_block>`, one node per
  /// line, parents before children. Headers are synthesized from prev and
  /// bits, so only structure and work survive a round trip.
  static BlockTree from_dump(std::istream& in, WorkPolicy policy = WorkPolicy::kTarget);
  void dump(std::ostream& out) const;

  InsertOutcome insert(const BlockHeader& header);
  /// False if the node is unknown or already has a body.
  bool attach_body(const Hash256& hash, Block body);
  void drop_body(const Hash256& hash);
  /// Removes the node and all of its descendants. The root cannot be removed.
  void remove_subtree(const Hash256& hash);

  bool contains(const Hash256& hash) const { return nodes_.contains(hash); }
  const TreeNode* find(const Hash256& hash) const;
  /// Throws UnknownBlockError.
  const TreeNode& node(const Hash256& hash) const;

  const Hash256& root() const { return root_; }
  std::size_t size() const { return nodes_.size(); }
  std::uint32_t max_height() const;
  WorkPolicy work_policy() const { return policy_; }

  /// Nodes at a height, ascending by hash.
  const std::vector<Hash256>& at_height(std::uint32_t height) const;
  std::optional<Hash256> ancestor_at(const Hash256& hash, std::uint32_t height) const;
  bool is_ancestor(const Hash256& ancestor, const Hash256& descendant) const;

  /// Root first; siblings in ascending hash order.
  std::vector<Hash256> bfs_order() const;

 private:
  BlockTree() = default;
  TreeNode& mutable_node(const Hash256& hash);
  void add_node(const Hash256& hash, const BlockHeader& header, std::optional<Hash256> parent);
  void refresh_depths_from(const Hash256& start);

  std::unordered_map<Hash256, TreeNode, Hash256Hasher> nodes_;
  std::map<std::uint32_t, std::vector<Hash256>> by_height_;
  Hash256 root_;
  WorkPolicy policy_ = WorkPolicy::kTarget;
};

}  // namespace btcsync
