#pragma once

// Grader aggregation, audit sampling, agreement and equity statistics,
// coverage reporting and the misgrade tracker.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "guidescore/scoring.hpp"
#include "guidescore/verdicts.hpp"

namespace guidescore {

// --- audit sampling ----------------------------------------------------------

inline constexpr double kDefaultAuditRate = 0.05;
inline constexpr double kRecommendedRateLow = 0.05;
inline constexpr double kRecommendedRateHigh = 0.10;

struct AuditSample {
  std::string sample_id;
  std::string case_id;
  std::string clause_id;
  Tier tier = Tier::moderate;
  dsl::TriState machine_state = dsl::TriState::unknown;
  bool machine_verdict = false;  // machine_state == TRUE
  std::optional<double> disagreement_ratio;
  bool grader_unresolved = false;
};

struct AuditSampleResult {
  std::size_t population = 0;
  std::vector<AuditSample> items;
  std::vector<std::string> warnings;  // OUT_OF_RECOMMENDED_RANGE, SAMPLE_EMPTY
};

// Draws round(rate * N) of the N applicable clause outcomes (ties round to
// even), stratified by tier with proportional allocation; remainders go to
// the highest tier. Deterministic in (reports, rate, seed) regardless of
// report order. Throws Error{bad_rate | empty}.
AuditSampleResult sample_for_audit(std::span<const ScoreReport> reports, double rate, std::uint64_t seed);
json audit_sample_to_json(const AuditSample& s);
json audit_sample_result_to_json(const AuditSampleResult& r);

// --- agreement ---------------------------------------------------------------

struct AdjudicationRecord {
  std::string sample_id;
  std::string case_id;
  std::string clause_id;
  bool machine_verdict = false;
  bool human_verdict = false;
  std::string note;
  std::string timestamp;
};

json adjudication_to_json(const AdjudicationRecord& a);
AdjudicationRecord adjudication_from_json(const json& j);

// counts[machine][human], index 1 = met.
struct ContingencyTable {
  std::array<std::array<std::size_t, 2>, 2> counts{};
  std::size_t total() const { return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1]; }
};

struct AgreementStats {
  std::size_t total = 0;
  double raw_agreement = 0.0;
  double expected_agreement = 0.0;
  double kappa = 0.0;
  ContingencyTable table;
};

// Cohen's kappa; when chance agreement is 1 kappa is 1 on perfect agreement
// and 0 otherwise. Throws Error{empty}.
AgreementStats agreement_from_table(const ContingencyTable& table);
AgreementStats agreement_stats(std::span<const AdjudicationRecord> adjudications);
json agreement_to_json(const AgreementStats& s);

// --- equity ------------------------------------------------------------------

struct EquityThresholds {
  double min_ratio = 1.5;
  double min_abs_z = 1.96;
  std::size_t min_group_size = 30;
};

struct EquityGroup {
  std::string label;
  std::size_t case_count = 0;
  std::size_t override_count = 0;  // cases with at least one accepted override
  double rate = 0.0;
  bool sufficient = false;  // false is reported as INSUFFICIENT_DATA
};

struct EquityPair {
  std::string group_a;
  std::string group_b;
  std::optional<double> rate_ratio;  // larger / smaller; nullopt when only the smaller rate is zero
  double z = 0.0;                    // (p_a - p_b) / pooled standard error
  bool flagged = false;
  bool insufficient_data = false;
};

struct EquityReport {
  std::string group_field;
  std::vector<EquityGroup> groups;
  std::vector<EquityPair> pairs;
  std::size_t ungrouped_cases = 0;
  EquityThresholds thresholds;
};

// Pooled two-proportion z statistic; 0 when the pooled rate is 0 or 1.
double two_proportion_z(std::size_t x1, std::size_t n1, std::size_t x2, std::size_t n2);

// group_field: demographic_group | jurisdiction | patient.<key> | context.<key>.
// Throws Error{no_groups} when fewer than two groups are present.
EquityReport equity_report(std::span<const OverrideRecord> ledger, std::span<const CaseRecord> cases,
                           std::string_view group_field, const EquityThresholds& thresholds = {});
json equity_to_json(const EquityReport& r);

// --- coverage ----------------------------------------------------------------

inline constexpr double kParityWeightCap = 5.0;

// Neglected, under-represented conditions tracked by default.
const std::vector<std::string>& priority_conditions();
std::map<std::string, double> uniform_targets(const std::vector<std::string>& conditions);

struct ConditionCoverage {
  std::string condition;
  std::size_t count = 0;
  double share = 0.0;
  std::optional<double> target;
  std::optional<double> parity_weight;
  bool capped = false;
};

struct CoverageReport {
  std::size_t total = 0;
  std::vector<ConditionCoverage> conditions;
  std::map<std::string, double> parity_weights;  // feeds aggregate_run
  std::vector<std::string> warnings;             // NO_CASES:<condition>
};

// share = count / N; weight = min(cap, target / share), cap when share is 0.
// Throws Error{empty | bad_targets}.
CoverageReport coverage_report(std::span<const CaseRecord> cases, const std::map<std::string, double>& targets,
                               double cap = kParityWeightCap);
json coverage_to_json(const CoverageReport& r);
std::map<std::string, double> parse_targets(std::string_view document_text);

// --- misgrade tracker --------------------------------------------------------

enum class MisgradeStatus { open, resolved };

struct MisgradeEntry {
  std::string entry_id;
  std::string case_id;
  std::string clause_id;
  bool machine_verdict = false;
  bool human_verdict = false;
  MisgradeStatus status = MisgradeStatus::open;
  std::string note;
  std::size_t occurrences = 1;
  std::vector<std::string> sample_ids;
};

json misgrade_to_json(const MisgradeEntry& e);
MisgradeEntry misgrade_from_json(const json& j);

class MisgradeTracker {
 public:
  const std::vector<MisgradeEntry>& entries() const { return entries_; }
  const MisgradeEntry* find(std::string_view entry_id) const;
  const MisgradeEntry* find(std::string_view case_id, std::string_view clause_id) const;

  // Disagreements open an entry or link to the existing one for the same
  // (case, clause); agreements are a no-op (nullopt).
  std::optional<MisgradeEntry> record(const AdjudicationRecord& adjudication);
  // open -> resolved only. Throws Error{not_found | invalid}.
  const MisgradeEntry& resolve(std::string_view entry_id, std::string note = {});

  // Snapshots are appended on every change; the last one per id wins.
  static MisgradeTracker from_ndjson(std::string_view text);

 private:
  std::vector<MisgradeEntry> entries_;
};

std::optional<MisgradeEntry> record_misgrade(MisgradeTracker& tracker, const AdjudicationRecord& adjudication);

}  // namespace guidescore
