#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "btcsync/block_tree.hpp"
#include "btcsync/stability.hpp"

namespace btcsync::harness {

std::optional<DepthKind> parse_depth_kind(const std::string& name);

/// `lead / unit`, printed as an integer when exact.
std::string format_stability(const StabilityScore& s);

/// One row per block in breadth-first order:
/// `hash height depth stability stable current`, where depth is in blocks
/// (confirmation) or raw work, and `current` marks the current chain.
void print_stability_table(const BlockTree& tree, std::uint64_t delta, DepthKind kind,
                           std::ostream& out);

}  // namespace btcsync::harness
