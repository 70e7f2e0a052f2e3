#include "guidescore/registry.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "guidescore/error.hpp"

namespace guidescore {

using namespace detail;

std::string_view tier_name(Tier t) noexcept {
  switch (t) {
    case Tier::high: return "high";
    case Tier::moderate: return "moderate";
    case Tier::low: return "low";
  }
  return "low";
}

std::optional<Tier> tier_from_name(std::string_view s) noexcept {
  if (s == "high") return Tier::high;
  if (s == "moderate") return Tier::moderate;
  if (s == "low") return Tier::low;
  return std::nullopt;
}

std::string_view polarity_name(Polarity p) noexcept { return p == Polarity::reward ? "reward" : "penalize"; }

std::optional<Polarity> polarity_from_name(std::string_view s) noexcept {
  if (s == "reward") return Polarity::reward;
  if (s == "penalize") return Polarity::penalize;
  return std::nullopt;
}

std::string_view reason_name(ApplicabilityReason r) noexcept {
  switch (r) {
    case ApplicabilityReason::applicable: return "APPLICABLE";
    case ApplicabilityReason::jurisdiction: return "JURISDICTION";
    case ApplicabilityReason::not_yet_effective: return "NOT_YET_EFFECTIVE";
    case ApplicabilityReason::expired: return "EXPIRED";
    case ApplicabilityReason::not_applicable: return "NOT_APPLICABLE";
    case ApplicabilityReason::insufficient_context: return "INSUFFICIENT_CONTEXT";
  }
  return "NOT_APPLICABLE";
}

bool GuidelineClause::is_global() const {
  return jurisdictions.size() == 1 && jurisdictions.front() == kGlobalJurisdiction;
}

bool GuidelineClause::covers(std::string_view jurisdiction) const {
  if (is_global()) return true;
  return std::binary_search(jurisdictions.begin(), jurisdictions.end(), jurisdiction);
}

bool is_canonical_clause_id(std::string_view id) {
  // <BODY>-<Topic>-<Year>-Rec-<dotted.path>
  static const std::regex kPattern(R"(^[A-Z][A-Za-z0-9]*-[A-Za-z][A-Za-z0-9]*-[0-9]{4}-Rec-[A-Za-z0-9]+(\.[A-Za-z0-9]+)*$)");
  return std::regex_match(id.begin(), id.end(), kPattern);
}

namespace {

bool is_iso_alpha2(std::string_view s) {
  return s.size() == 2 && s[0] >= 'A' && s[0] <= 'Z' && s[1] >= 'A' && s[1] <= 'Z';
}

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

void validate_clause(const GuidelineClause& c) {
  const std::string where = "clause " + c.id;
  if (!is_canonical_clause_id(c.id)) {
    throw Error(ErrorCode::bad_id, "clause id '" + c.id + "' does not match <BODY>-<Topic>-<Year>-Rec-<path>");
  }
  if (c.jurisdictions.empty()) throw Error(ErrorCode::invalid, where + ": jurisdictions must be nonempty");
  const bool has_global =
      std::find(c.jurisdictions.begin(), c.jurisdictions.end(), kGlobalJurisdiction) != c.jurisdictions.end();
  if (has_global && c.jurisdictions.size() > 1) {
    throw Error(ErrorCode::invalid, where + ": GLOBAL may not be combined with specific jurisdictions");
  }
  for (const auto& j : c.jurisdictions) {
    if (j != kGlobalJurisdiction && !is_iso_alpha2(j)) {
      throw Error(ErrorCode::invalid, where + ": '" + j + "' is not an ISO 3166-1 alpha-2 code");
    }
  }
  if (c.effective_end && !(c.effective_start < *c.effective_end)) {
    throw Error(ErrorCode::invalid, where + ": effective_start must precede effective_end");
  }
  if (trim(c.trace_quote).empty()) throw Error(ErrorCode::invalid, where + ": trace_quote must be nonempty");
  if (trim(c.checklist_text).empty()) throw Error(ErrorCode::invalid, where + ": checklist_text must be nonempty");
  if (trim(c.guideline_title).empty()) throw Error(ErrorCode::invalid, where + ": guideline_title must be nonempty");
  if (trim(c.recommendation_path).empty()) throw Error(ErrorCode::invalid, where + ": recommendation_path must be nonempty");
}

dsl::Expression parse_clause_expression(const GuidelineClause& c, const char* field, const std::string& text) {
  try {
    return dsl::parse_expression(text);
  } catch (const Error& e) {
    throw Error(ErrorCode::expr, "clause " + c.id + " field " + field + ": " + std::string(error_code_name(e.code())) +
                                     " " + e.detail(),
                e.offset());
  }
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += v[i];
  }
  return out;
}

}  // namespace

Registry Registry::build(std::string version_label, int benchmark_year, std::vector<GuidelineClause> clauses) {
  if (version_label.empty()) throw Error(ErrorCode::invalid, "registry version_label must be nonempty");
  Registry r;
  r.version_label_ = std::move(version_label);
  r.benchmark_year_ = benchmark_year;
  for (auto& c : clauses) {
    c.jurisdictions = sorted_unique(std::move(c.jurisdictions));
    c.sanctioned_reasons = sorted_unique(std::move(c.sanctioned_reasons));
    validate_clause(c);
    if (r.index_.count(c.id)) throw Error(ErrorCode::dup_id, "duplicate clause id '" + c.id + "'");
    c.applies_when = parse_clause_expression(c, "applies_when", c.applies_when_text);
    if (trim(c.condition_text) == kVerdictSentinel) {
      c.condition.reset();
    } else {
      c.condition = parse_clause_expression(c, "condition_expr", c.condition_text);
    }
    r.index_.emplace(c.id, r.clauses_.size());
    r.ledger_.push_back(TraceRecord{c.id, c.guideline_title, c.recommendation_path, c.checklist_text, c.trace_quote,
                                    r.version_label_});
    r.clauses_.push_back(std::move(c));
  }
  return r;
}

const GuidelineClause* Registry::find(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &clauses_[it->second];
}

bool Registry::has_only_global_clauses() const {
  return std::all_of(clauses_.begin(), clauses_.end(), [](const auto& c) { return c.is_global(); });
}

GuidelineClause clause_from_json(const json& j) {
  GuidelineClause c;
  c.id = require_string(j, "id", "clause");
  const std::string where = "clause " + c.id;
  c.guideline_title = require_string(j, "guideline_title", where);
  c.guideline_version = optional_string(j, "guideline_version", where);
  c.recommendation_path = require_string(j, "recommendation_path", where);

  const std::string tier = require_string(j, "tier", where);
  auto t = tier_from_name(tier);
  if (!t) throw Error(ErrorCode::syntax, where + ": tier must be high|moderate|low, got '" + tier + "'");
  c.tier = *t;
  const std::string polarity = require_string(j, "polarity", where);
  auto p = polarity_from_name(polarity);
  if (!p) throw Error(ErrorCode::syntax, where + ": polarity must be reward|penalize, got '" + polarity + "'");
  c.polarity = *p;

  if (!require(j, "jurisdictions", where).is_array()) {
    throw Error(ErrorCode::syntax, where + ": jurisdictions must be an array");
  }
  c.jurisdictions = string_list(j, "jurisdictions", where);

  const std::string start = require_string(j, "effective_start", where);
  auto sd = parse_date(start);
  if (!sd) throw Error(ErrorCode::syntax, where + ": effective_start must be YYYY-MM-DD");
  c.effective_start = *sd;
  const std::string end = j.contains("effective_end") ? require_string(j, "effective_end", where) : "OPEN";
  if (end != "OPEN") {
    auto ed = parse_date(end);
    if (!ed) throw Error(ErrorCode::syntax, where + ": effective_end must be YYYY-MM-DD or OPEN");
    c.effective_end = *ed;
  }

  c.applies_when_text = require_string(j, "applies_when", where);
  c.condition_text = require_string(j, "condition_expr", where);
  c.checklist_text = require_string(j, "checklist_text", where);
  c.trace_quote = require_string(j, "trace_quote", where);
  if (auto it = j.find("volatile"); it != j.end()) {
    if (!it->is_boolean()) throw Error(ErrorCode::syntax, where + ": volatile must be a boolean");
    c.volatile_item = it->get<bool>();
  }
  c.sanctioned_reasons = string_list(j, "sanctioned_reasons", where);
  return c;
}

json clause_to_json(const GuidelineClause& c) {
  json out;
  out["id"] = c.id;
  out["guideline_title"] = c.guideline_title;
  out["guideline_version"] = c.guideline_version;
  out["recommendation_path"] = c.recommendation_path;
  out["tier"] = std::string(tier_name(c.tier));
  out["polarity"] = std::string(polarity_name(c.polarity));
  out["jurisdictions"] = c.jurisdictions;
  out["effective_start"] = format_date(c.effective_start);
  out["effective_end"] = c.effective_end ? format_date(*c.effective_end) : std::string("OPEN");
  out["applies_when"] = c.applies_when_text;
  out["condition_expr"] = c.condition_text;
  out["checklist_text"] = c.checklist_text;
  out["trace_quote"] = c.trace_quote;
  out["volatile"] = c.volatile_item;
  out["sanctioned_reasons"] = c.sanctioned_reasons;
  return out;
}

Registry parse_registry(std::string_view document_text) {
  const json doc = parse_json_document(document_text);
  if (!doc.is_object()) throw Error(ErrorCode::syntax, "registry document must be a JSON object");
  const std::string label = require_string(doc, "version_label", "registry");
  const json& year = require(doc, "benchmark_year", "registry");
  if (!year.is_number_integer()) throw Error(ErrorCode::syntax, "registry: benchmark_year must be an integer");
  const json& list = require(doc, "clauses", "registry");
  if (!list.is_array()) throw Error(ErrorCode::syntax, "registry: clauses must be an array");
  std::vector<GuidelineClause> clauses;
  clauses.reserve(list.size());
  for (const auto& cj : list) clauses.push_back(clause_from_json(cj));
  return Registry::build(label, year.get<int>(), std::move(clauses));
}

json registry_to_json(const Registry& r) {
  json clauses = json::array();
  for (const auto& c : r.clauses()) clauses.push_back(clause_to_json(c));
  return json{{"version_label", r.version_label()}, {"benchmark_year", r.benchmark_year()}, {"clauses", clauses}};
}

Date evaluation_date(const Registry& registry, const CaseRecord& c) {
  if (c.evaluation_date) return *c.evaluation_date;
  const int year = c.benchmark_year.value_or(registry.benchmark_year());
  return Date{std::chrono::year{year}, std::chrono::January, std::chrono::day{1}};
}

std::vector<Applicability> resolve_applicable(const Registry& registry, const CaseRecord& c) {
  const bool has_jurisdiction = c.jurisdiction && !c.jurisdiction->empty();
  if (!has_jurisdiction && !registry.has_only_global_clauses()) {
    throw Error(ErrorCode::no_jurisdiction,
                "case " + c.case_id + " has no jurisdiction but the registry holds jurisdiction-specific clauses");
  }
  const Date when = evaluation_date(registry, c);
  const dsl::EvaluationEnv env = effective_env(c);

  std::vector<Applicability> out;
  out.reserve(registry.clauses().size());
  for (const auto& clause : registry.clauses()) {
    Applicability a{&clause, false, ApplicabilityReason::applicable};
    if (!clause.is_global() && !clause.covers(*c.jurisdiction)) {
      a.reason = ApplicabilityReason::jurisdiction;
    } else if (when < clause.effective_start) {
      a.reason = ApplicabilityReason::not_yet_effective;
    } else if (clause.effective_end && !(when < *clause.effective_end)) {
      a.reason = ApplicabilityReason::expired;
    } else {
      switch (dsl::evaluate_expression(clause.applies_when, env)) {
        case dsl::TriState::true_: a.applicable = true; break;
        case dsl::TriState::false_: a.reason = ApplicabilityReason::not_applicable; break;
        case dsl::TriState::unknown: a.reason = ApplicabilityReason::insufficient_context; break;
      }
    }
    out.push_back(a);
  }
  return out;
}

TraceRecord trace_clause(const Registry& registry, std::string_view clause_id) {
  for (const auto& t : registry.ledger()) {
    if (t.clause_id == clause_id) return t;
  }
  throw Error(ErrorCode::not_found, "no clause with id '" + std::string(clause_id) + "'");
}

json trace_to_json(const TraceRecord& t) {
  return json{{"clause_id", t.clause_id},
              {"guideline_title", t.guideline_title},
              {"recommendation_path", t.recommendation_path},
              {"checklist_text", t.checklist_text},
              {"trace_quote", t.trace_quote},
              {"registry_version", t.registry_version}};
}

namespace {

std::vector<std::pair<std::string, std::string>> comparable_fields(const GuidelineClause& c) {
  return {
      {"guideline_title", c.guideline_title},
      {"guideline_version", c.guideline_version},
      {"recommendation_path", c.recommendation_path},
      {"polarity", std::string(polarity_name(c.polarity))},
      {"jurisdictions", join(c.jurisdictions)},
      {"effective_start", format_date(c.effective_start)},
      {"effective_end", c.effective_end ? format_date(*c.effective_end) : "OPEN"},
      {"applies_when", c.applies_when_text},
      {"condition_expr", c.condition_text},
      {"checklist_text", c.checklist_text},
      {"trace_quote", c.trace_quote},
      {"volatile", c.volatile_item ? "true" : "false"},
      {"sanctioned_reasons", join(c.sanctioned_reasons)},
  };
}

std::string render_changelog(const MigrationDiff& d, const std::string& old_label, const std::string& new_label) {
  std::string md = "# Registry changelog: " + old_label + " -> " + new_label + "\n\n";
  if (d.empty()) return md + "No clause changes.\n";
  if (!d.added.empty()) {
    md += "## Added\n\n";
    for (const auto& id : d.added) md += "- `" + id + "`\n";
    md += "\n";
  }
  if (!d.retired.empty()) {
    md += "## Retired\n\n";
    for (const auto& id : d.retired) md += "- `" + id + "`\n";
    md += "\n";
  }
  if (!d.tier_changes.empty()) {
    md += "## Evidence tier changes\n\n";
    for (const auto& t : d.tier_changes) {
      md += "- `" + t.id + "`: " + std::string(tier_name(t.old_tier)) + " -> " + std::string(tier_name(t.new_tier)) +
            "\n";
    }
    md += "\n";
  }
  if (!d.expr_changes.empty()) {
    md += "## Expression and text changes\n\n";
    for (const auto& f : d.expr_changes) {
      md += "- `" + f.id + "` " + f.field + ": `" + f.old_value + "` -> `" + f.new_value + "`\n";
    }
    md += "\n";
  }
  return md;
}

}  // namespace

bool MigrationDiff::same_changes(const MigrationDiff& o) const {
  return added == o.added && retired == o.retired && tier_changes == o.tier_changes && expr_changes == o.expr_changes;
}

MigrationDiff diff_registries(const Registry& old_registry, const Registry& new_registry) {
  MigrationDiff d;
  for (const auto& c : new_registry.clauses()) {
    if (!old_registry.find(c.id)) d.added.push_back(c.id);
  }
  for (const auto& c : old_registry.clauses()) {
    const GuidelineClause* n = new_registry.find(c.id);
    if (!n) {
      d.retired.push_back(c.id);
      continue;
    }
    if (c.tier != n->tier) d.tier_changes.push_back({c.id, c.tier, n->tier});
    const auto before = comparable_fields(c);
    const auto after = comparable_fields(*n);
    for (std::size_t i = 0; i < before.size(); ++i) {
      if (before[i].second != after[i].second) {
        d.expr_changes.push_back({c.id, before[i].first, before[i].second, after[i].second});
      }
    }
  }
  std::sort(d.added.begin(), d.added.end());
  std::sort(d.retired.begin(), d.retired.end());
  d.changelog_text = render_changelog(d, old_registry.version_label(), new_registry.version_label());
  return d;
}

json diff_to_json(const MigrationDiff& d) {
  json tiers = json::array();
  for (const auto& t : d.tier_changes) {
    tiers.push_back({{"id", t.id}, {"old_tier", tier_name(t.old_tier)}, {"new_tier", tier_name(t.new_tier)}});
  }
  json exprs = json::array();
  for (const auto& f : d.expr_changes) {
    exprs.push_back({{"id", f.id}, {"field", f.field}, {"old", f.old_value}, {"new", f.new_value}});
  }
  return json{{"added", d.added},
              {"retired", d.retired},
              {"tier_changes", tiers},
              {"expr_changes", exprs},
              {"changelog_text", d.changelog_text}};
}

}  // namespace guidescore
