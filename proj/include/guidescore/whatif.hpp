#pragma once

#include <vector>

#include "guidescore/scoring.hpp"

namespace guidescore {

struct ClauseDelta {
  std::string clause_id;
  Points before;
  Points after;
  Points delta;
  bool applicable_before = false;
  bool applicable_after = false;
  ApplicabilityReason reason_after = ApplicabilityReason::applicable;
};

struct WhatIfResult {
  ScoreReport before;
  ScoreReport after;
  std::vector<ClauseDelta> deltas;  // exactly the clauses whose adjusted points moved
};

// Rescores `c` with `env_delta` overlaid on its env. Pure: nothing is logged.
// A nonempty delta jurisdiction also moves the case to that jurisdiction.
WhatIfResult what_if_rescore(const Registry& registry, const OverrideOntology& ontology, const CaseRecord& c,
                             const dsl::EvaluationEnv& env_delta);

json whatif_to_json(const WhatIfResult& w);

}  // namespace guidescore
