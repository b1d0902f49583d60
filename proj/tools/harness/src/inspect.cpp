#include "btcsync/harness/inspect.hpp"

#include <boost/integer/common_factor.hpp>
#include <iomanip>
#include <ostream>
#include <unordered_set>

namespace btcsync::harness {

std::optional<DepthKind> parse_depth_kind(const std::string& name) {
  if (name == "confirmation" || name == "confirmations") return DepthKind::kConfirmation;
  if (name == "work" || name == "difficulty") return DepthKind::kWork;
  return std::nullopt;
}

std::string format_stability(const StabilityScore& s) {
  const WorkDelta unit(s.unit);
  if (unit == 0) return "nan";
  if (s.lead % unit == 0) return WorkDelta(s.lead / unit).str();
  const WorkDelta magnitude = s.lead < 0 ? WorkDelta(-s.lead) : s.lead;
  const WorkDelta g = boost::integer::gcd(magnitude, unit);
  return WorkDelta(s.lead / g).str() + "/" + WorkDelta(unit / g).str();
}

void print_stability_table(const BlockTree& tree, std::uint64_t delta, DepthKind kind,
                           std::ostream& out) {
  const auto chain = current_chain(tree);
  const std::unordered_set<Hash256, Hash256Hasher> on_chain(chain.begin(), chain.end());
  out << std::left << std::setw(66) << "hash" << std::setw(8) << "height" << std::setw(12)
      << "depth" << std::setw(12) << "stability" << std::setw(8) << "stable"
      << "current\n";
  for (const auto& h : tree.bfs_order()) {
    const auto& n = tree.node(h);
    const auto score = stability(tree, h, kind);
    out << std::left << std::setw(66) << h.to_hex() << std::setw(8) << n.height << std::setw(12)
        << depth(tree, h, kind).str() << std::setw(12) << format_stability(score)
        << std::setw(8) << (score.at_least(delta) ? "yes" : "no")
        << (on_chain.contains(h) ? "*" : "") << '\n';
  }
}

}  // namespace btcsync::harness
