#include "guidescore/whatif.hpp"

namespace guidescore {

namespace {

const ClauseOutcome* find_outcome(const ScoreReport& r, const std::string& id) {
  for (const auto& o : r.outcomes) {
    if (o.clause_id == id) return &o;
  }
  return nullptr;
}

Points effective_points(const ClauseOutcome* o) {
  return o && o->applicable ? o->adjusted_points : Points{};
}

}  // namespace

WhatIfResult what_if_rescore(const Registry& registry, const OverrideOntology& ontology, const CaseRecord& c,
                             const dsl::EvaluationEnv& env_delta) {
  WhatIfResult result;
  result.before = score_case(registry, ontology, c);

  CaseRecord modified = c;
  modified.env = c.env.overlaid(env_delta);
  if (!env_delta.jurisdiction.empty()) modified.jurisdiction = env_delta.jurisdiction;
  result.after = score_case(registry, ontology, modified);

  for (const auto& after : result.after.outcomes) {
    const ClauseOutcome* before = find_outcome(result.before, after.clause_id);
    const Points b = effective_points(before);
    const Points a = effective_points(&after);
    if (a == b) continue;
    result.deltas.push_back(ClauseDelta{after.clause_id, b, a, a - b, before && before->applicable, after.applicable,
                                        after.reason});
  }
  return result;
}

json whatif_to_json(const WhatIfResult& w) {
  json deltas = json::array();
  for (const auto& d : w.deltas) {
    deltas.push_back({{"clause_id", d.clause_id},
                      {"before", d.before.to_double()},
                      {"after", d.after.to_double()},
                      {"delta", d.delta.to_double()},
                      {"applicable_before", d.applicable_before},
                      {"applicable_after", d.applicable_after},
                      {"reason_after", std::string(reason_name(d.reason_after))}});
  }
  return json{{"before", report_to_json(w.before)}, {"after", report_to_json(w.after)}, {"deltas", deltas}};
}

}  // namespace guidescore
