#pragma once

// Versioned registry of guideline-anchored reward clauses.
//
// A registry is immutable once built: Registry::build validates every clause,
// pre-parses its expressions and derives the traceability ledger, so a
// const Registry& can be shared freely between threads.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "guidescore/dsl.hpp"
#include "guidescore/json_io.hpp"
#include "guidescore/records.hpp"

namespace guidescore {

enum class Tier { high, moderate, low };
enum class Polarity { reward, penalize };

std::string_view tier_name(Tier t) noexcept;
std::optional<Tier> tier_from_name(std::string_view s) noexcept;
std::string_view polarity_name(Polarity p) noexcept;
std::optional<Polarity> polarity_from_name(std::string_view s) noexcept;

inline constexpr std::string_view kGlobalJurisdiction = "GLOBAL";
// Sentinel condition_expr deferring satisfaction to external grader verdicts.
inline constexpr std::string_view kVerdictSentinel = "verdict()";

struct GuidelineClause {
  std::string id;
  std::string guideline_title;
  std::string guideline_version;
  std::string recommendation_path;
  Tier tier = Tier::moderate;
  Polarity polarity = Polarity::reward;
  std::vector<std::string> jurisdictions;  // sorted, unique
  Date effective_start{};
  std::optional<Date> effective_end;  // exclusive; nullopt means OPEN
  std::string applies_when_text;
  std::string condition_text;
  std::string checklist_text;
  std::string trace_quote;
  bool volatile_item = false;
  std::vector<std::string> sanctioned_reasons;  // sorted, unique

  // Filled by Registry::build.
  dsl::Expression applies_when;
  std::optional<dsl::Expression> condition;  // nullopt when deferring to verdict()

  bool is_global() const;
  bool defers_to_verdict() const { return !condition.has_value(); }
  bool covers(std::string_view jurisdiction) const;
};

struct TraceRecord {
  std::string clause_id;
  std::string guideline_title;
  std::string recommendation_path;
  std::string checklist_text;
  std::string trace_quote;
  std::string registry_version;
  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

class Registry {
 public:
  // Validates, parses expressions and derives the ledger. Throws
  // Error{dup_id | bad_id | expr | invalid}.
  static Registry build(std::string version_label, int benchmark_year, std::vector<GuidelineClause> clauses);

  const std::string& version_label() const { return version_label_; }
  int benchmark_year() const { return benchmark_year_; }
  const std::vector<GuidelineClause>& clauses() const { return clauses_; }
  const std::vector<TraceRecord>& ledger() const { return ledger_; }

  const GuidelineClause* find(std::string_view id) const;
  bool has_only_global_clauses() const;

 private:
  std::string version_label_;
  int benchmark_year_ = 0;
  std::vector<GuidelineClause> clauses_;
  std::vector<TraceRecord> ledger_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

bool is_canonical_clause_id(std::string_view id);

// Clause fields only; expressions are parsed later by Registry::build.
GuidelineClause clause_from_json(const json& j);
json clause_to_json(const GuidelineClause& c);

Registry parse_registry(std::string_view document_text);
json registry_to_json(const Registry& r);

enum class ApplicabilityReason { applicable, jurisdiction, not_yet_effective, expired, not_applicable, insufficient_context };
std::string_view reason_name(ApplicabilityReason r) noexcept;

struct Applicability {
  const GuidelineClause* clause = nullptr;
  bool applicable = false;
  ApplicabilityReason reason = ApplicabilityReason::applicable;
};

// Evaluation date of a case: its own date, else Jan 1 of its benchmark year,
// else Jan 1 of the registry's benchmark year.
Date evaluation_date(const Registry& registry, const CaseRecord& c);

// One entry per registry clause, in registry order. Throws
// Error{no_jurisdiction} when the case has no jurisdiction and the registry
// holds jurisdiction-specific clauses.
std::vector<Applicability> resolve_applicable(const Registry& registry, const CaseRecord& c);

// Throws Error{not_found}.
TraceRecord trace_clause(const Registry& registry, std::string_view clause_id);
json trace_to_json(const TraceRecord& t);

struct TierChange {
  std::string id;
  Tier old_tier;
  Tier new_tier;
  friend bool operator==(const TierChange&, const TierChange&) = default;
};

struct FieldChange {
  std::string id;
  std::string field;
  std::string old_value;
  std::string new_value;
  friend bool operator==(const FieldChange&, const FieldChange&) = default;
};

struct MigrationDiff {
  std::vector<std::string> added;
  std::vector<std::string> retired;
  std::vector<TierChange> tier_changes;
  std::vector<FieldChange> expr_changes;
  std::string changelog_text;

  bool empty() const { return added.empty() && retired.empty() && tier_changes.empty() && expr_changes.empty(); }
  // Compares everything except the rendered changelog.
  bool same_changes(const MigrationDiff& o) const;
};

MigrationDiff diff_registries(const Registry& old_registry, const Registry& new_registry);
json diff_to_json(const MigrationDiff& d);

}  // namespace guidescore
