#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "guidescore/dsl.hpp"

namespace guidescore {

using Date = std::chrono::year_month_day;

enum class Role { user, assistant };

struct Turn {
  Role role = Role::user;
  std::string text;
  friend bool operator==(const Turn&, const Turn&) = default;
};

// A request to soften one penalty, and (once accepted) a ledger entry.
// prev_hash/hash are empty until the record is appended to a ledger.
struct OverrideRecord {
  std::string reason_code;
  std::string clause_id;
  std::string justification;
  std::string timestamp;
  std::string case_id;
  std::string prev_hash;
  std::string hash;
  friend bool operator==(const OverrideRecord&, const OverrideRecord&) = default;
};

struct CaseRecord {
  std::string case_id;
  std::optional<int> benchmark_year;
  std::optional<std::string> jurisdiction;
  std::optional<Date> evaluation_date;
  std::set<std::string> condition_tags;
  std::optional<std::string> demographic_group;
  std::vector<Turn> turns;
  dsl::EvaluationEnv env;
  std::map<std::string, std::vector<bool>> grader_verdicts;
  std::vector<OverrideRecord> override_requests;
  friend bool operator==(const CaseRecord&, const CaseRecord&) = default;
};

// The env an expression sees for this case: the case jurisdiction is exposed
// through jurisdiction() unless the env already carries one.
dsl::EvaluationEnv effective_env(const CaseRecord& c);

}  // namespace guidescore
