#pragma once

#include <string_view>
#include <vector>

namespace guidescore {

enum class Consensus { met, unmet, unresolved };
std::string_view consensus_name(Consensus c) noexcept;

struct VerdictAggregate {
  Consensus consensus = Consensus::unresolved;
  double disagreement_ratio = 0.0;  // minority count / panel size
  bool low_confidence = false;      // single-grader panel
  std::size_t panel_size = 0;
};

// Strict majority wins; an exact tie is UNRESOLVED and goes to a human.
// Throws Error{empty}.
VerdictAggregate aggregate_grader_verdicts(const std::vector<bool>& verdicts);

}  // namespace guidescore
