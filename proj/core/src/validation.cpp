#include "btcsync/validation.hpp"

#include <algorithm>
#include <vector>

namespace btcsync {

std::string_view to_string(Violation v) {
  switch (v) {
    case Violation::kMalformed: return "malformed";
    case Violation::kOrphan: return "orphan";
    case Violation::kBadDifficultyBits: return "bad-bits";
    case Violation::kHighHash: return "pow";
    case Violation::kTimeTooOld: return "time-too-old";
    case Violation::kTimeTooNew: return "time-too-new";
    case Violation::kBadBlock: return "bad-block";
    case Violation::kMissingParentBody: return "missing-parent-body";
    case Violation::kMerkleMismatch: return "merkle-mismatch";
    case Violation::kHeaderMismatch: return "header-mismatch";
    case Violation::kBelowAnchor: return "below-anchor";
  }
  return "unknown";
}

std::uint32_t expected_next_bits(const TreeNode& parent, const BlockTree& tree,
                                 const ChainParams& params) {
  if (!params.retarget) return parent.header.bits;
  const std::uint32_t height = parent.height + 1;
  if (height % params.retarget_interval != 0) return parent.header.bits;

  const auto first_height = parent.height + 1 - params.retarget_interval;
  const auto first = tree.ancestor_at(parent.hash, first_height);
  if (!first) return parent.header.bits;
  std::int64_t timespan = static_cast<std::int64_t>(parent.header.time) -
                          static_cast<std::int64_t>(tree.node(*first).header.time);
  timespan = std::clamp(timespan, params.target_timespan / 4, params.target_timespan * 4);

  const auto old_target = CompactTarget::expand(parent.header.bits);
  if (!old_target) return parent.header.bits;
  Uint512 next = Uint512(*old_target) * static_cast<std::uint64_t>(timespan);
  next /= static_cast<std::uint64_t>(params.target_timespan);
  if (next > Uint512(params.pow_limit)) next = Uint512(params.pow_limit);
  return CompactTarget::compress(static_cast<Uint256>(next));
}

std::uint32_t median_time_past(const TreeNode& tip, const BlockTree& tree,
                               const ChainParams& params) {
  std::vector<std::uint32_t> times;
  const TreeNode* n = &tip;
  while (n && times.size() < params.median_time_span) {
    times.push_back(n->header.time);
    n = n->parent ? tree.find(*n->parent) : nullptr;
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

ValidationResult validate_header(const BlockHeader& header, const BlockTree& tree,
                                 const ChainParams& params, std::uint32_t now) {
  const auto target = CompactTarget::expand(header.bits);
  if (!target || *target > params.pow_limit) return ValidationResult::fail(Violation::kMalformed);

  const TreeNode* parent = tree.find(header.prev);
  if (!parent) return ValidationResult::fail(Violation::kOrphan);

  if (header.bits != expected_next_bits(*parent, tree, params))
    return ValidationResult::fail(Violation::kBadDifficultyBits);

  if (hash_to_uint(header.hash()) > *target) return ValidationResult::fail(Violation::kHighHash);

  if (header.time <= median_time_past(*parent, tree, params))
    return ValidationResult::fail(Violation::kTimeTooOld);
  if (static_cast<std::uint64_t>(header.time) >
      static_cast<std::uint64_t>(now) + params.max_future_drift)
    return ValidationResult::fail(Violation::kTimeTooNew);

  return ValidationResult::ok();
}

ValidationResult check_block_structure(const Block& block) {
  if (block.transactions.empty() || !block.transactions.front().is_coinbase())
    return ValidationResult::fail(Violation::kBadBlock);
  for (std::size_t i = 0; i < block.transactions.size(); ++i) {
    const auto& tx = block.transactions[i];
    if (tx.inputs.empty() || tx.outputs.empty()) return ValidationResult::fail(Violation::kBadBlock);
    if (i > 0) {
      for (const auto& in : tx.inputs)
        if (in.prevout.is_null()) return ValidationResult::fail(Violation::kBadBlock);
    }
    std::uint64_t total = 0;
    for (const auto& out : tx.outputs) {
      if (out.value > kMaxMoney) return ValidationResult::fail(Violation::kBadBlock);
      total += out.value;
      if (total > kMaxMoney) return ValidationResult::fail(Violation::kBadBlock);
    }
  }
  return ValidationResult::ok();
}

ValidationResult validate_block(const Block& block, const BlockTree& tree,
                                const ChainParams& params, std::uint32_t now,
                                const Hash256& anchor) {
  if (auto r = validate_header(block.header, tree, params, now); !r) return r;
  if (auto r = check_block_structure(block); !r) return r;
  const auto& parent = tree.node(block.header.prev);
  if (!parent.has_body() && parent.hash != anchor)
    return ValidationResult::fail(Violation::kMissingParentBody);
  if (block_merkle_root(block) != block.header.merkle_root)
    return ValidationResult::fail(Violation::kMerkleMismatch);
  return ValidationResult::ok();
}

}  // namespace btcsync
