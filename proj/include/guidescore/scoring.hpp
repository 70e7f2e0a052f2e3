#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "guidescore/decimal.hpp"
#include "guidescore/overrides.hpp"
#include "guidescore/records.hpp"
#include "guidescore/registry.hpp"

namespace guidescore {

// high ±3, moderate ±2, low ±1; penalize clauses are negative.
Points tier_weight(Tier tier, Polarity polarity) noexcept;

struct ClauseOutcome {
  std::string clause_id;
  Tier tier = Tier::moderate;
  Polarity polarity = Polarity::reward;
  bool applicable = false;
  ApplicabilityReason reason = ApplicabilityReason::applicable;
  dsl::TriState met_or_triggered = dsl::TriState::unknown;
  Points base_points;
  Points adjusted_points;
  std::optional<std::string> override_ref;  // reason code of an accepted override
  std::optional<OverrideRejection> override_rejection;
  bool insufficiency_flag = false;
  // Set when satisfaction came from a grader panel.
  std::optional<double> grader_disagreement;
  bool grader_unresolved = false;
};

struct ScoreReport {
  std::string case_id;
  std::string registry_version;
  std::optional<std::string> jurisdiction;
  std::vector<std::string> condition_tags;
  std::vector<ClauseOutcome> outcomes;
  Points earned;
  Points max_positive;
  std::optional<double> normalized;  // nullopt means NOT_APPLICABLE
  double case_weight = 1.0;
  std::vector<std::string> trace;  // ids of applicable clauses
};

// nullopt (NOT_APPLICABLE) when max_positive is zero, else
// clamp(earned / max_positive, 0, 1).
std::optional<double> normalize_score(Points earned, Points max_positive);

// Throws Error{no_jurisdiction | verdict_missing | unit | type}.
ScoreReport score_case(const Registry& registry, const OverrideOntology& ontology, const CaseRecord& c);

// Scores every case; the result is ordered by case_id.
std::vector<ScoreReport> score_run(const Registry& registry, const OverrideOntology& ontology,
                                   std::span<const CaseRecord> cases);

// The accepted overrides of a scored case, in clause order, ready to append
// to a ledger.
std::vector<OverrideRecord> accepted_overrides(const CaseRecord& c, const ScoreReport& report);

json outcome_to_json(const ClauseOutcome& o);
json report_to_json(const ScoreReport& r);
ScoreReport report_from_json(const json& j);
// Canonical bytes of a report, used for determinism checks.
std::string report_bytes(const ScoreReport& r);

// Max over the case's condition tags of the weight map; 1 when none match.
double case_weight_for(const std::vector<std::string>& condition_tags, const std::map<std::string, double>& weights);

struct TierBreakdown {
  std::size_t applicable = 0;
  std::size_t satisfied = 0;  // met reward / triggered penalize
  Points earned;
  Points max_positive;
};

struct GroupBreakdown {
  std::size_t cases = 0;
  std::size_t scored = 0;
  std::optional<double> weighted_mean;
};

struct RunSummary {
  std::size_t case_count = 0;
  std::size_t scored_count = 0;
  std::optional<double> weighted_mean;
  double total_weight = 0.0;
  std::size_t insufficiency_count = 0;
  std::map<std::string, TierBreakdown> per_tier;
  std::map<std::string, GroupBreakdown> per_jurisdiction;
  std::map<std::string, GroupBreakdown> per_condition;
};

// Weighted mean of normalized scores with NOT_APPLICABLE cases excluded.
// Throws Error{empty_run}.
RunSummary aggregate_run(std::span<const ScoreReport> reports, const std::map<std::string, double>& weights);
json summary_to_json(const RunSummary& s);

}  // namespace guidescore
