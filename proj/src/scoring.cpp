#include "guidescore/scoring.hpp"

#include <algorithm>

#include "guidescore/error.hpp"
#include "guidescore/verdicts.hpp"

namespace guidescore {

Points tier_weight(Tier tier, Polarity polarity) noexcept {
  std::int64_t magnitude = 1;
  switch (tier) {
    case Tier::high: magnitude = 3; break;
    case Tier::moderate: magnitude = 2; break;
    case Tier::low: magnitude = 1; break;
  }
  return Points::whole(polarity == Polarity::reward ? magnitude : -magnitude);
}

std::optional<double> normalize_score(Points earned, Points max_positive) {
  if (max_positive.sign() <= 0) return std::nullopt;
  const double ratio = static_cast<double>(earned.ticks()) / static_cast<double>(max_positive.ticks());
  return std::clamp(ratio, 0.0, 1.0);
}

namespace {

dsl::TriState satisfaction(const GuidelineClause& clause, const CaseRecord& c, const dsl::EvaluationEnv& env,
                           ClauseOutcome& outcome) {
  if (!clause.defers_to_verdict()) return dsl::evaluate_expression(*clause.condition, env);
  auto it = c.grader_verdicts.find(clause.id);
  if (it == c.grader_verdicts.end() || it->second.empty()) {
    throw Error(ErrorCode::verdict_missing,
                "case " + c.case_id + ": clause " + clause.id + " defers to verdict() but no grader verdicts exist");
  }
  const VerdictAggregate agg = aggregate_grader_verdicts(it->second);
  outcome.grader_disagreement = agg.disagreement_ratio;
  switch (agg.consensus) {
    case Consensus::met: return dsl::TriState::true_;
    case Consensus::unmet: return dsl::TriState::false_;
    case Consensus::unresolved: outcome.grader_unresolved = true; return dsl::TriState::unknown;
  }
  return dsl::TriState::unknown;
}

void apply_requested_overrides(const GuidelineClause& clause, const CaseRecord& c, const OverrideOntology& ontology,
                               const dsl::EvaluationEnv& env, ClauseOutcome& outcome) {
  for (const auto& request : c.override_requests) {
    if (request.clause_id != clause.id) continue;
    const OverrideDecision d = apply_override(outcome.base_points, request, ontology, env, &clause);
    if (d.accepted) {
      outcome.adjusted_points = d.adjusted_points;
      outcome.override_ref = request.reason_code;
      outcome.override_rejection.reset();
      return;
    }
    if (!outcome.override_rejection) outcome.override_rejection = d.rejection;
  }
}

}  // namespace

ScoreReport score_case(const Registry& registry, const OverrideOntology& ontology, const CaseRecord& c) {
  ScoreReport report;
  report.case_id = c.case_id;
  report.registry_version = registry.version_label();
  report.jurisdiction = c.jurisdiction;
  report.condition_tags.assign(c.condition_tags.begin(), c.condition_tags.end());

  const dsl::EvaluationEnv env = effective_env(c);
  for (const Applicability& a : resolve_applicable(registry, c)) {
    const GuidelineClause& clause = *a.clause;
    ClauseOutcome o;
    o.clause_id = clause.id;
    o.tier = clause.tier;
    o.polarity = clause.polarity;
    o.applicable = a.applicable;
    o.reason = a.reason;
    o.base_points = tier_weight(clause.tier, clause.polarity);

    if (a.applicable) {
      o.met_or_triggered = satisfaction(clause, c, env, o);
      switch (o.met_or_triggered) {
        case dsl::TriState::true_:
          o.adjusted_points = o.base_points;
          if (clause.polarity == Polarity::penalize) apply_requested_overrides(clause, c, ontology, env, o);
          break;
        case dsl::TriState::false_: break;
        case dsl::TriState::unknown: o.insufficiency_flag = true; break;
      }
      report.earned += o.adjusted_points;
      if (clause.polarity == Polarity::reward) report.max_positive += o.base_points;
      report.trace.push_back(clause.id);
    }
    report.outcomes.push_back(std::move(o));
  }
  report.normalized = normalize_score(report.earned, report.max_positive);
  return report;
}

std::vector<ScoreReport> score_run(const Registry& registry, const OverrideOntology& ontology,
                                   std::span<const CaseRecord> cases) {
  std::vector<ScoreReport> out;
  out.reserve(cases.size());
  for (const auto& c : cases) out.push_back(score_case(registry, ontology, c));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.case_id < b.case_id; });
  return out;
}

std::vector<OverrideRecord> accepted_overrides(const CaseRecord& c, const ScoreReport& report) {
  std::vector<OverrideRecord> out;
  for (const auto& o : report.outcomes) {
    if (!o.override_ref) continue;
    for (const auto& r : c.override_requests) {
      if (r.clause_id == o.clause_id && r.reason_code == *o.override_ref) {
        OverrideRecord rec = r;
        rec.case_id = c.case_id;
        rec.prev_hash.clear();
        rec.hash.clear();
        out.push_back(std::move(rec));
        break;
      }
    }
  }
  return out;
}

namespace {

json optional_json(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> optional_from(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

Points points_from(const json& j, const char* key) {
  return Points::from_double(detail::require(j, key, "report").get<double>());
}

dsl::TriState tristate_from(std::string_view s) {
  if (s == "TRUE") return dsl::TriState::true_;
  if (s == "FALSE") return dsl::TriState::false_;
  return dsl::TriState::unknown;
}

ApplicabilityReason reason_from(std::string_view s) {
  for (auto r : {ApplicabilityReason::applicable, ApplicabilityReason::jurisdiction,
                 ApplicabilityReason::not_yet_effective, ApplicabilityReason::expired,
                 ApplicabilityReason::not_applicable, ApplicabilityReason::insufficient_context}) {
    if (reason_name(r) == s) return r;
  }
  throw Error(ErrorCode::syntax, "report: unknown applicability reason '" + std::string(s) + "'");
}

std::optional<OverrideRejection> rejection_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  const std::string s = j.get<std::string>();
  for (auto r : {OverrideRejection::unsanctioned, OverrideRejection::precondition_failed,
                 OverrideRejection::no_justification}) {
    if (rejection_name(r) == s) return r;
  }
  throw Error(ErrorCode::syntax, "report: unknown override rejection '" + s + "'");
}

}  // namespace

json outcome_to_json(const ClauseOutcome& o) {
  json j;
  j["clause_id"] = o.clause_id;
  j["tier"] = std::string(tier_name(o.tier));
  j["polarity"] = std::string(polarity_name(o.polarity));
  j["applicable"] = o.applicable;
  j["reason"] = std::string(reason_name(o.reason));
  j["met_or_triggered"] = std::string(dsl::tristate_name(o.met_or_triggered));
  j["base_points"] = o.base_points.to_double();
  j["adjusted_points"] = o.adjusted_points.to_double();
  j["override_ref"] = optional_json(o.override_ref);
  j["override_rejection"] =
      o.override_rejection ? json(std::string(rejection_name(*o.override_rejection))) : json(nullptr);
  j["insufficiency_flag"] = o.insufficiency_flag;
  j["grader_disagreement"] = o.grader_disagreement ? json(*o.grader_disagreement) : json(nullptr);
  j["grader_unresolved"] = o.grader_unresolved;
  return j;
}

json report_to_json(const ScoreReport& r) {
  json j;
  j["case_id"] = r.case_id;
  j["registry_version"] = r.registry_version;
  j["jurisdiction"] = optional_json(r.jurisdiction);
  j["condition_tags"] = r.condition_tags;
  json outcomes = json::array();
  for (const auto& o : r.outcomes) outcomes.push_back(outcome_to_json(o));
  j["outcomes"] = outcomes;
  j["earned"] = r.earned.to_double();
  j["max_positive"] = r.max_positive.to_double();
  j["normalized"] = r.normalized ? json(*r.normalized) : json("NOT_APPLICABLE");
  j["case_weight"] = r.case_weight;
  j["trace"] = r.trace;
  return j;
}

ScoreReport report_from_json(const json& j) {
  using detail::require;
  using detail::require_string;
  ScoreReport r;
  try {
    r.case_id = require_string(j, "case_id", "report");
    r.registry_version = require_string(j, "registry_version", "report");
    r.jurisdiction = optional_from(j, "jurisdiction");
    r.condition_tags = detail::string_list(j, "condition_tags", "report");
    for (const auto& oj : require(j, "outcomes", "report")) {
      ClauseOutcome o;
      o.clause_id = require_string(oj, "clause_id", "outcome");
      auto tier = tier_from_name(require_string(oj, "tier", "outcome"));
      auto pol = polarity_from_name(require_string(oj, "polarity", "outcome"));
      if (!tier || !pol) throw Error(ErrorCode::syntax, "outcome " + o.clause_id + ": bad tier or polarity");
      o.tier = *tier;
      o.polarity = *pol;
      o.applicable = require(oj, "applicable", "outcome").get<bool>();
      o.reason = reason_from(require_string(oj, "reason", "outcome"));
      o.met_or_triggered = tristate_from(require_string(oj, "met_or_triggered", "outcome"));
      o.base_points = points_from(oj, "base_points");
      o.adjusted_points = points_from(oj, "adjusted_points");
      o.override_ref = optional_from(oj, "override_ref");
      o.override_rejection = rejection_from(oj.value("override_rejection", json(nullptr)));
      o.insufficiency_flag = oj.value("insufficiency_flag", false);
      if (auto it = oj.find("grader_disagreement"); it != oj.end() && !it->is_null()) {
        o.grader_disagreement = it->get<double>();
      }
      o.grader_unresolved = oj.value("grader_unresolved", false);
      r.outcomes.push_back(std::move(o));
    }
    r.earned = points_from(j, "earned");
    r.max_positive = points_from(j, "max_positive");
    const json& n = require(j, "normalized", "report");
    if (n.is_number()) r.normalized = n.get<double>();
    r.case_weight = j.value("case_weight", 1.0);
    r.trace = detail::string_list(j, "trace", "report");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::syntax, std::string("report: ") + e.what());
  }
  return r;
}

std::string report_bytes(const ScoreReport& r) { return report_to_json(r).dump(); }

double case_weight_for(const std::vector<std::string>& condition_tags, const std::map<std::string, double>& weights) {
  std::optional<double> best;
  for (const auto& tag : condition_tags) {
    auto it = weights.find(tag);
    if (it != weights.end() && (!best || it->second > *best)) best = it->second;
  }
  return best.value_or(1.0);
}

namespace {

struct WeightedAccumulator {
  double weighted_sum = 0.0;
  double weight = 0.0;
  std::size_t cases = 0;
  std::size_t scored = 0;

  void add(const ScoreReport& r) {
    ++cases;
    if (!r.normalized) return;
    ++scored;
    weighted_sum += r.case_weight * *r.normalized;
    weight += r.case_weight;
  }
  std::optional<double> mean() const {
    if (weight <= 0.0) return std::nullopt;
    return weighted_sum / weight;
  }
};

}  // namespace

RunSummary aggregate_run(std::span<const ScoreReport> reports, const std::map<std::string, double>& weights) {
  if (reports.empty()) throw Error(ErrorCode::empty_run, "cannot aggregate an empty run");

  std::vector<ScoreReport> ordered(reports.begin(), reports.end());
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.case_id < b.case_id; });

  RunSummary s;
  WeightedAccumulator overall;
  std::map<std::string, WeightedAccumulator> by_jurisdiction;
  std::map<std::string, WeightedAccumulator> by_condition;
  for (auto& r : ordered) {
    r.case_weight = case_weight_for(r.condition_tags, weights);
    overall.add(r);
    by_jurisdiction[r.jurisdiction.value_or("(none)")].add(r);
    if (r.condition_tags.empty()) by_condition["(untagged)"].add(r);
    for (const auto& tag : r.condition_tags) by_condition[tag].add(r);
    for (const auto& o : r.outcomes) {
      if (!o.applicable) continue;
      if (o.insufficiency_flag) ++s.insufficiency_count;
      TierBreakdown& t = s.per_tier[std::string(tier_name(o.tier))];
      ++t.applicable;
      if (o.met_or_triggered == dsl::TriState::true_) ++t.satisfied;
      t.earned += o.adjusted_points;
      if (o.polarity == Polarity::reward) t.max_positive += o.base_points;
    }
  }
  s.case_count = overall.cases;
  s.scored_count = overall.scored;
  s.weighted_mean = overall.mean();
  s.total_weight = overall.weight;
  for (const auto& [k, acc] : by_jurisdiction) s.per_jurisdiction[k] = {acc.cases, acc.scored, acc.mean()};
  for (const auto& [k, acc] : by_condition) s.per_condition[k] = {acc.cases, acc.scored, acc.mean()};
  return s;
}

json summary_to_json(const RunSummary& s) {
  auto group = [](const std::map<std::string, GroupBreakdown>& m) {
    json out = json::object();
    for (const auto& [k, g] : m) {
      out[k] = {{"cases", g.cases},
                {"scored", g.scored},
                {"weighted_mean", g.weighted_mean ? json(*g.weighted_mean) : json(nullptr)}};
    }
    return out;
  };
  json tiers = json::object();
  for (const auto& [k, t] : s.per_tier) {
    tiers[k] = {{"applicable", t.applicable},
                {"satisfied", t.satisfied},
                {"earned", t.earned.to_double()},
                {"max_positive", t.max_positive.to_double()}};
  }
  return json{{"case_count", s.case_count},
              {"scored_count", s.scored_count},
              {"weighted_mean", s.weighted_mean ? json(*s.weighted_mean) : json(nullptr)},
              {"total_weight", s.total_weight},
              {"insufficiency_count", s.insufficiency_count},
              {"per_tier", tiers},
              {"per_jurisdiction", group(s.per_jurisdiction)},
              {"per_condition", group(s.per_condition)}};
}

}  // namespace guidescore
