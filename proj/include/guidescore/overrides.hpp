#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "guidescore/decimal.hpp"
#include "guidescore/dsl.hpp"
#include "guidescore/records.hpp"
#include "guidescore/registry.hpp"

namespace guidescore {

// Largest penalty a clause can carry (high tier).
inline constexpr Points kMaxPenaltyMagnitude = Points::whole(3);

struct OverrideEntry {
  std::string reason_code;
  std::string description;
  std::string precondition_text;
  dsl::Expression precondition;
  Points adjusted_penalty;
  std::vector<std::string> applicable_clause_ids;
};

class OverrideOntology {
 public:
  OverrideOntology() = default;
  // Throws Error{dup_reason | bad_penalty | expr}.
  explicit OverrideOntology(std::vector<OverrideEntry> entries);

  const std::vector<OverrideEntry>& entries() const { return entries_; }
  const OverrideEntry* find(std::string_view reason_code) const;

 private:
  std::vector<OverrideEntry> entries_;
};

// Document: JSON array of {reason_code, description, precondition,
// adjusted_penalty, applicable_clause_ids}.
OverrideOntology load_ontology(std::string_view document_text);
json ontology_to_json(const OverrideOntology& o);

enum class OverrideRejection { unsanctioned, precondition_failed, no_justification };
std::string_view rejection_name(OverrideRejection r) noexcept;

struct OverrideDecision {
  Points adjusted_points;
  bool accepted = false;
  std::optional<OverrideRejection> rejection;
};

// A reason is sanctioned for a clause when the ontology entry lists the
// clause id, or the clause lists the reason among its sanctioned_reasons.
// Rejected requests keep the full base penalty. Throws
// Error{positive_base} when base_points > 0.
OverrideDecision apply_override(Points base_points, const OverrideRecord& request, const OverrideOntology& ontology,
                                const dsl::EvaluationEnv& env, const GuidelineClause* clause = nullptr);

// --- tamper-evident ledger -------------------------------------------------

// prev_hash of the first entry.
inline const std::string kGenesisHash(64, '0');

std::string sha256_hex(std::string_view data);

// Sorted-key JSON of the record without its hash fields.
std::string canonical_record_bytes(const OverrideRecord& r);
// sha256(prev_hash || canonical_record_bytes(r))
std::string chain_digest(std::string_view prev_hash, const OverrideRecord& r);

struct LedgerVerification {
  bool ok = true;
  std::size_t first_bad_index = 0;  // meaningful only when !ok
  std::string message;
};

class OverrideLedger {
 public:
  const std::vector<OverrideRecord>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const std::string& tail_hash() const;

  // Fills prev_hash (when empty) and hash, then appends. Throws
  // Error{hash_chain} if a provided prev_hash does not match the tail, or
  // Error{invalid} for an empty justification.
  const OverrideRecord& append(OverrideRecord record);

  LedgerVerification verify() const;

  std::string to_ndjson() const;
  // Loads entries verbatim; call verify() to check them.
  static OverrideLedger from_ndjson(std::string_view text);

 private:
  std::vector<OverrideRecord> entries_;
};

OverrideLedger append_override(OverrideLedger ledger, OverrideRecord record);

}  // namespace guidescore
