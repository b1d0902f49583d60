#include "btcsync/stability.hpp"

namespace btcsync {

namespace {

WorkDelta depth_value(const TreeNode& n, DepthKind kind) {
  if (kind == DepthKind::kConfirmation) return WorkDelta(n.depth_confirmations);
  return WorkDelta(n.depth_work.amount());
}

}  // namespace

Uint256 depth(const BlockTree& tree, const Hash256& node, DepthKind kind) {
  const auto& n = tree.node(node);
  if (kind == DepthKind::kConfirmation) return Uint256(n.depth_confirmations);
  return n.depth_work.amount();
}

StabilityScore stability(const BlockTree& tree, const Hash256& node, DepthKind kind,
                         const std::optional<Hash256>& reference) {
  const auto& n = tree.node(node);
  StabilityScore score;
  const WorkDelta own = depth_value(n, kind);
  score.lead = own;
  for (const auto& other : tree.at_height(n.height)) {
    if (other == node) continue;
    const WorkDelta gap = own - depth_value(tree.node(other), kind);
    if (gap < score.lead) score.lead = gap;
  }
  if (kind == DepthKind::kWork) {
    score.unit = reference ? tree.node(*reference).work.amount() : n.work.amount();
  }
  return score;
}

bool is_delta_stable(const BlockTree& tree, const Hash256& node, std::uint64_t delta,
                     DepthKind kind, const std::optional<Hash256>& reference) {
  return stability(tree, node, kind, reference).at_least(delta);
}

std::vector<Hash256> current_chain(const BlockTree& tree) {
  std::vector<Hash256> chain{tree.root()};
  const auto any = [](const TreeNode&) { return true; };
  while (auto next = heaviest_child(tree, chain.back(), any)) chain.push_back(*next);
  return chain;
}

std::int64_t confirmations(const BlockTree& tree, const Hash256& node) {
  return stability(tree, node, DepthKind::kConfirmation).confirmations();
}

}  // namespace btcsync
