#include "guidescore/lifecycle.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "guidescore/error.hpp"

namespace guidescore {

using namespace detail;

namespace {

Tier tier_field(const json& obj, const char* key, const std::string& where) {
  const std::string s = require_string(obj, key, where);
  auto t = tier_from_name(s);
  if (!t) throw Error(ErrorCode::bad_tier, where + ": '" + s + "' is not one of high|moderate|low");
  return *t;
}

}  // namespace

RevisionDocument parse_revisions(std::string_view document_text) {
  const json doc = parse_json_document(document_text);
  if (!doc.is_object()) throw Error(ErrorCode::syntax, "revision document must be a JSON object");
  RevisionDocument rev;
  if (auto s = optional_string(doc, "new_version_label", "revisions"); !s.empty()) rev.new_version_label = s;
  if (auto it = doc.find("tier_changes"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) throw Error(ErrorCode::syntax, "revisions: tier_changes must be an array");
    for (const auto& tc : *it) {
      TierRevision t;
      t.id = require_string(tc, "id", "tier change");
      const std::string where = "tier change " + t.id;
      if (tc.contains("from")) t.from = tier_field(tc, "from", where);
      t.to = tier_field(tc, tc.contains("to") ? "to" : "tier", where);
      rev.tier_changes.push_back(std::move(t));
    }
  }
  rev.retire = string_list(doc, "retire", "revisions");
  if (auto it = doc.find("add"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) throw Error(ErrorCode::syntax, "revisions: add must be an array");
    for (const auto& cj : *it) rev.add.push_back(clause_from_json(cj));
  }
  return rev;
}

std::string bump_version_label(std::string_view label) {
  static const std::regex kQuarter(R"(^([0-9]{4})-Q([1-4])$)");
  std::match_results<std::string_view::const_iterator> m;
  if (std::regex_match(label.begin(), label.end(), m, kQuarter)) {
    int year = std::stoi(m[1].str());
    int quarter = std::stoi(m[2].str()) + 1;
    if (quarter > 4) {
      quarter = 1;
      ++year;
    }
    return std::to_string(year) + "-Q" + std::to_string(quarter);
  }
  return std::string(label) + "-rev";
}

Migration migrate_registry(const Registry& old_registry, const RevisionDocument& revisions) {
  std::vector<GuidelineClause> clauses = old_registry.clauses();
  auto locate = [&](const std::string& id) {
    auto it = std::find_if(clauses.begin(), clauses.end(), [&](const auto& c) { return c.id == id; });
    if (it == clauses.end()) throw Error(ErrorCode::unknown_id, "revision references unknown clause '" + id + "'");
    return it;
  };

  for (const auto& t : revisions.tier_changes) {
    auto it = locate(t.id);
    if (t.from && *t.from != it->tier) {
      throw Error(ErrorCode::bad_tier, "clause " + t.id + " has tier " + std::string(tier_name(it->tier)) +
                                           ", revision expects " + std::string(tier_name(*t.from)));
    }
    it->tier = t.to;
  }
  for (const auto& id : revisions.retire) clauses.erase(locate(id));
  for (const auto& c : revisions.add) clauses.push_back(c);

  const std::string label = revisions.new_version_label.value_or(bump_version_label(old_registry.version_label()));
  Registry next = Registry::build(label, old_registry.benchmark_year(), std::move(clauses));
  MigrationDiff diff = diff_registries(old_registry, next);
  return Migration{std::move(next), std::move(diff)};
}

std::vector<ArchivedCase> parse_archive(std::string_view document_text) {
  const json doc = parse_json_document(document_text);
  if (!doc.is_array()) throw Error(ErrorCode::syntax, "archive must be a JSON array of {case, report}");
  std::vector<ArchivedCase> out;
  for (const auto& e : doc) {
    ArchivedCase a{case_from_json(require(e, "case", "archive entry")),
                   report_from_json(require(e, "report", "archive entry"))};
    out.push_back(std::move(a));
  }
  return out;
}

json archive_to_json(std::span<const ArchivedCase> archive) {
  json out = json::array();
  for (const auto& a : archive) out.push_back({{"case", case_to_json(a.case_record)}, {"report", report_to_json(a.report)}});
  return out;
}

Recalculation recalculate_history(std::span<const ArchivedCase> archive, const Registry& new_registry,
                                  const OverrideOntology& ontology) {
  Recalculation result;
  for (const auto& entry : archive) {
    try {
      RecalculatedReport r;
      r.case_id = entry.case_record.case_id;
      r.old_score = entry.report;
      r.new_score = score_case(new_registry, ontology, entry.case_record);
      r.benchmark_year = entry.case_record.benchmark_year;
      for (const auto& old : entry.report.outcomes) {
        const GuidelineClause* now = new_registry.find(old.clause_id);
        if (!now) {
          if (old.applicable) r.notes.push_back("retired clause " + old.clause_id + " dropped");
          continue;
        }
        if (now->tier != old.tier) {
          r.notes.push_back("tier change " + old.clause_id + ": " + std::string(tier_name(old.tier)) + " -> " +
                            std::string(tier_name(now->tier)));
        }
      }
      if (!r.new_score.normalized && r.old_score.normalized) {
        r.notes.push_back("no applicable clauses remain; score is NOT_APPLICABLE");
      }
      result.reports.push_back(std::move(r));
    } catch (const Error& e) {
      result.errors.push_back({entry.case_record.case_id, e.what()});
    }
  }
  return result;
}

json recalculation_to_json(const Recalculation& r) {
  json reports = json::array();
  for (const auto& rr : r.reports) {
    reports.push_back({{"case_id", rr.case_id},
                       {"benchmark_year", rr.benchmark_year ? json(*rr.benchmark_year) : json(nullptr)},
                       {"old_score", report_to_json(rr.old_score)},
                       {"new_score", report_to_json(rr.new_score)},
                       {"notes", rr.notes}});
  }
  json errors = json::array();
  for (const auto& e : r.errors) errors.push_back({{"case_id", e.case_id}, {"message", e.message}});
  return json{{"reports", reports}, {"errors", errors}};
}

namespace {

bool touches_volatile(const CaseRecord& c, const Registry& registry) {
  for (const auto& clause : registry.clauses()) {
    if (!clause.volatile_item) continue;
    if (c.grader_verdicts.count(clause.id)) return true;
    for (const auto& r : c.override_requests) {
      if (r.clause_id == clause.id) return true;
    }
  }
  try {
    for (const auto& a : resolve_applicable(registry, c)) {
      if (a.applicable && a.clause->volatile_item) return true;
    }
  } catch (const Error&) {
    // Unresolvable cases are reported by the missing-field checks.
  }
  return false;
}

}  // namespace

LintReport lint_dataset(std::span<const CaseRecord> cases, const Registry* registry) {
  LintReport r;
  r.total = cases.size();
  for (const auto& c : cases) {
    if (c.turns.size() >= 3) ++r.multi_turn;
    if (!c.jurisdiction || c.jurisdiction->empty()) ++r.missing_jurisdiction;
    if (!c.benchmark_year) ++r.missing_benchmark_year;
    if (registry && !c.condition_tags.count(std::string(kVolatileTag)) && touches_volatile(c, *registry)) {
      ++r.volatile_untagged;
    }
  }
  r.multi_turn_share = r.total ? static_cast<double>(r.multi_turn) / static_cast<double>(r.total) : 0.0;
  r.gate_passed = r.total > 0 && 2 * r.multi_turn >= r.total;
  if (r.total == 0) r.warnings.push_back("EMPTY_DATASET");
  if (!r.gate_passed) r.warnings.push_back("MULTI_TURN_SHARE_BELOW_GATE");
  if (r.missing_jurisdiction) r.warnings.push_back("MISSING_JURISDICTION");
  if (r.missing_benchmark_year) r.warnings.push_back("MISSING_BENCHMARK_YEAR");
  if (r.volatile_untagged) r.warnings.push_back("VOLATILE_UNTAGGED");
  return r;
}

json lint_to_json(const LintReport& r) {
  return json{{"total", r.total},
              {"multi_turn", r.multi_turn},
              {"multi_turn_share", r.multi_turn_share},
              {"gate_threshold", kMultiTurnGate},
              {"gate", r.gate_passed ? "PASS" : "FAIL"},
              {"missing_jurisdiction", r.missing_jurisdiction},
              {"missing_benchmark_year", r.missing_benchmark_year},
              {"volatile_untagged", r.volatile_untagged},
              {"warnings", r.warnings}};
}

}  // namespace guidescore
