#pragma once

#include <cstdint>
#include <string_view>

#include "btcsync/block_tree.hpp"
#include "btcsync/chain_params.hpp"
#include "btcsync/primitives.hpp"

namespace btcsync {

enum class Violation {
  kMalformed,          // bits do not encode a usable target, or target above the limit
  kOrphan,             // prev is not a locally available header
  kBadDifficultyBits,  // bits differ from the expected target at this height
  kHighHash,           // header hash above target
  kTimeTooOld,         // time not above median time past
  kTimeTooNew,         // time beyond the future drift bound
  kBadBlock,           // empty, missing/misplaced coinbase, empty inputs/outputs, bad values
  kMissingParentBody,  // parent block neither stored nor the anchor
  kMerkleMismatch,
  kHeaderMismatch,     // response pair whose header differs from the block's header
  kBelowAnchor,        // would fork at or below the anchor height
};

std::string_view to_string(Violation v);

class ValidationResult {
 public:
  static ValidationResult ok() { return ValidationResult(); }
  static ValidationResult fail(Violation v) { return ValidationResult(v); }

  bool is_ok() const { return !failed_; }
  explicit operator bool() const { return is_ok(); }
  /// Meaningful only when !is_ok().
  Violation violation() const { return violation_; }

  friend bool operator==(const ValidationResult&, const ValidationResult&) = default;

 private:
  ValidationResult() = default;
  explicit ValidationResult(Violation v) : failed_(true), violation_(v) {}

  bool failed_ = false;
  Violation violation_ = Violation::kMalformed;
};

/// Bits required for a child of `parent`.
std::uint32_t expected_next_bits(const TreeNode& parent, const BlockTree& tree,
                                 const ChainParams& params);

/// Median of the timestamps of `tip` and up to ten of its ancestors.
std::uint32_t median_time_past(const TreeNode& tip, const BlockTree& tree,
                               const ChainParams& params);

/// Context checks for a header that would extend `tree`. `now` is the
/// validator's clock in Unix seconds.
ValidationResult validate_header(const BlockHeader& header, const BlockTree& tree,
                                 const ChainParams& params, std::uint32_t now);

/// Structure-only checks: non-empty, coinbase first and only first, every
/// transaction with inputs and outputs, values within money range.
ValidationResult check_block_structure(const Block& block);

/// Header checks, structure, parent body availability (a stored body or the
/// anchor) and merkle root. Spending conditions are never evaluated.
ValidationResult validate_block(const Block& block, const BlockTree& tree,
                                const ChainParams& params, std::uint32_t now,
                                const Hash256& anchor);

}  // namespace btcsync
