#pragma once

// Registry revisions, historical rescoring and dataset lint.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "guidescore/registry.hpp"
#include "guidescore/scoring.hpp"

namespace guidescore {

struct TierRevision {
  std::string id;
  std::optional<Tier> from;  // checked against the current tier when present
  Tier to = Tier::moderate;
};

struct RevisionDocument {
  std::optional<std::string> new_version_label;
  std::vector<TierRevision> tier_changes;
  std::vector<std::string> retire;
  std::vector<GuidelineClause> add;
};

// {"new_version_label", "tier_changes": [{"id","from","to"}], "retire": [ids],
//  "add": [clause objects]}. Throws Error{syntax | bad_tier}.
RevisionDocument parse_revisions(std::string_view document_text);

// "2025-Q3" -> "2025-Q4", "2025-Q4" -> "2026-Q1"; other labels get "-rev".
std::string bump_version_label(std::string_view label);

struct Migration {
  Registry registry;
  MigrationDiff diff;
};

// Throws Error{unknown_id | bad_tier | dup_id}.
Migration migrate_registry(const Registry& old_registry, const RevisionDocument& revisions);

struct ArchivedCase {
  CaseRecord case_record;
  ScoreReport report;
};

std::vector<ArchivedCase> parse_archive(std::string_view document_text);
json archive_to_json(std::span<const ArchivedCase> archive);

struct RecalculatedReport {
  std::string case_id;
  ScoreReport old_score;
  ScoreReport new_score;
  std::optional<int> benchmark_year;
  std::vector<std::string> notes;
};

struct RecalculationError {
  std::string case_id;
  std::string message;
};

struct Recalculation {
  std::vector<RecalculatedReport> reports;
  std::vector<RecalculationError> errors;
};

// Rescores every archived case under `new_registry`. Per-case failures are
// collected rather than aborting the run.
Recalculation recalculate_history(std::span<const ArchivedCase> archive, const Registry& new_registry,
                                  const OverrideOntology& ontology);
json recalculation_to_json(const Recalculation& r);

inline constexpr double kMultiTurnGate = 0.5;
inline constexpr std::string_view kVolatileTag = "volatile";

struct LintReport {
  std::size_t total = 0;
  std::size_t multi_turn = 0;  // cases with >= 3 turns
  double multi_turn_share = 0.0;
  bool gate_passed = false;
  std::size_t missing_jurisdiction = 0;
  std::size_t missing_benchmark_year = 0;
  std::size_t volatile_untagged = 0;
  std::vector<std::string> warnings;
};

// With a registry, also counts cases that touch a volatile clause without
// carrying the "volatile" condition tag.
LintReport lint_dataset(std::span<const CaseRecord> cases, const Registry* registry = nullptr);
json lint_to_json(const LintReport& r);

}  // namespace guidescore
