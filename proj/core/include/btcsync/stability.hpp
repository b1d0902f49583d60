#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "btcsync/block_tree.hpp"

namespace btcsync {

enum class DepthKind {
  kConfirmation,  // c(b) = 1
  kWork,          // c(b) = w(b)
};

/// Largest δ for which a block is δ-stable, kept as an exact ratio.
///
/// `lead` is min(d(b), min over same-height rivals of d(b) - d(b')) in cost
/// units; `unit` is 1 for confirmations and w(b*) for work, so the score is
/// lead / unit. Comparisons cross-multiply and never round.
struct StabilityScore {
  WorkDelta lead;
  Uint256 unit{1};

  bool at_least(std::uint64_t delta) const { return lead >= WorkDelta(unit) * delta; }
  /// Exact for confirmation scores.
  std::int64_t confirmations() const { return static_cast<std::int64_t>(lead); }

  friend bool operator==(const StabilityScore& a, const StabilityScore& b) {
    return a.lead * WorkDelta(b.unit) == b.lead * WorkDelta(a.unit);
  }
};

/// Depth in cost units (block count for kConfirmation). Throws UnknownBlockError.
Uint256 depth(const BlockTree& tree, const Hash256& node, DepthKind kind);

/// Stability score. For kWork the unit is the work of `reference`
/// (default: the block itself).
StabilityScore stability(const BlockTree& tree, const Hash256& node, DepthKind kind,
                         const std::optional<Hash256>& reference = std::nullopt);

/// Both conditions of δ-stability: d(b) >= δ and a lead of at least δ over
/// every other block at the same height, in units of w(reference) for kWork.
bool is_delta_stable(const BlockTree& tree, const Hash256& node, std::uint64_t delta,
                     DepthKind kind, const std::optional<Hash256>& reference = std::nullopt);

/// Root-to-leaf path choosing, at each step, the child of greatest work
/// depth; equal work is resolved toward the smallest hash.
std::vector<Hash256> current_chain(const BlockTree& tree);

/// Child of `parent` with greatest work depth among those accepted by
/// `filter`, smallest hash on ties.
template <typename Filter>
std::optional<Hash256> heaviest_child(const BlockTree& tree, const Hash256& parent,
                                      Filter&& filter) {
  std::optional<Hash256> best;
  const Work* best_depth = nullptr;
  for (const auto& c : tree.node(parent).children) {
    const auto& child = tree.node(c);
    if (!filter(child)) continue;
    if (!best_depth || child.depth_work > *best_depth) {
      best = c;
      best_depth = &child.depth_work;
    }
  }
  return best;
}

/// Confirmation-based stability; negative on a losing fork.
std::int64_t confirmations(const BlockTree& tree, const Hash256& node);

}  // namespace btcsync
