#include "guidescore/audits.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <tuple>

#include "guidescore/error.hpp"

namespace guidescore {

using namespace detail;

std::string_view consensus_name(Consensus c) noexcept {
  switch (c) {
    case Consensus::met: return "met";
    case Consensus::unmet: return "unmet";
    case Consensus::unresolved: return "UNRESOLVED";
  }
  return "UNRESOLVED";
}

VerdictAggregate aggregate_grader_verdicts(const std::vector<bool>& verdicts) {
  if (verdicts.empty()) throw Error(ErrorCode::empty, "no grader verdicts to aggregate");
  const auto met = static_cast<std::size_t>(std::count(verdicts.begin(), verdicts.end(), true));
  const std::size_t unmet = verdicts.size() - met;
  VerdictAggregate agg;
  agg.panel_size = verdicts.size();
  agg.low_confidence = verdicts.size() == 1;
  if (met > unmet) agg.consensus = Consensus::met;
  else if (unmet > met) agg.consensus = Consensus::unmet;
  else agg.consensus = Consensus::unresolved;
  agg.disagreement_ratio = static_cast<double>(std::min(met, unmet)) / static_cast<double>(verdicts.size());
  return agg;
}

// --- sampling ----------------------------------------------------------------

namespace {

// Uniform integer in [0, bound) by rejection; std::uniform_int_distribution
// is implementation-defined and would break cross-platform reproducibility.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

std::size_t round_half_even(double x) {
  // Snap products like 0.05 * 10 that land a hair off the half.
  const double snapped = std::round(x * 1e9) / 1e9;
  return static_cast<std::size_t>(std::nearbyint(snapped));
}

int tier_rank(Tier t) {
  switch (t) {
    case Tier::high: return 0;
    case Tier::moderate: return 1;
    case Tier::low: return 2;
  }
  return 2;
}

}  // namespace

AuditSampleResult sample_for_audit(std::span<const ScoreReport> reports, double rate, std::uint64_t seed) {
  if (!(rate > 0.0 && rate <= 1.0)) throw Error(ErrorCode::bad_rate, "audit rate must lie in (0, 1]");

  std::vector<AuditSample> population;
  for (const auto& r : reports) {
    for (const auto& o : r.outcomes) {
      if (!o.applicable) continue;
      AuditSample s;
      s.case_id = r.case_id;
      s.clause_id = o.clause_id;
      s.tier = o.tier;
      s.machine_state = o.met_or_triggered;
      s.machine_verdict = o.met_or_triggered == dsl::TriState::true_;
      s.disagreement_ratio = o.grader_disagreement;
      s.grader_unresolved = o.grader_unresolved;
      population.push_back(std::move(s));
    }
  }
  if (population.empty()) throw Error(ErrorCode::empty, "no applicable clause outcomes to sample");
  std::sort(population.begin(), population.end(), [](const auto& a, const auto& b) {
    return std::tie(a.case_id, a.clause_id) < std::tie(b.case_id, b.clause_id);
  });

  AuditSampleResult result;
  result.population = population.size();
  if (rate < kRecommendedRateLow - 1e-12 || rate > kRecommendedRateHigh + 1e-12) {
    result.warnings.push_back("OUT_OF_RECOMMENDED_RANGE");
  }
  const std::size_t n = population.size();
  const std::size_t target = std::min(n, round_half_even(rate * static_cast<double>(n)));
  if (target == 0) {
    result.warnings.push_back("SAMPLE_EMPTY");
    return result;
  }

  std::array<std::vector<AuditSample>, 3> strata;
  for (auto& s : population) strata[tier_rank(s.tier)].push_back(std::move(s));

  std::array<std::size_t, 3> alloc{};
  std::size_t allocated = 0;
  for (std::size_t t = 0; t < 3; ++t) {
    alloc[t] = target * strata[t].size() / n;
    allocated += alloc[t];
  }
  for (std::size_t t = 0; t < 3 && allocated < target; ++t) {
    const std::size_t room = strata[t].size() - alloc[t];
    const std::size_t extra = std::min(room, target - allocated);
    alloc[t] += extra;
    allocated += extra;
  }

  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < 3; ++t) {
    auto& stratum = strata[t];
    for (std::size_t i = 0; i < alloc[t]; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(bounded(rng, stratum.size() - i));
      std::swap(stratum[i], stratum[j]);
      result.items.push_back(stratum[i]);
    }
  }
  for (std::size_t i = 0; i < result.items.size(); ++i) {
    std::string idx = std::to_string(i + 1);
    idx.insert(0, idx.size() < 4 ? 4 - idx.size() : 0, '0');
    result.items[i].sample_id = "S" + std::to_string(seed) + "-" + idx;
  }
  return result;
}

json audit_sample_to_json(const AuditSample& s) {
  return json{{"sample_id", s.sample_id},
              {"case_id", s.case_id},
              {"clause_id", s.clause_id},
              {"tier", std::string(tier_name(s.tier))},
              {"machine_state", std::string(dsl::tristate_name(s.machine_state))},
              {"machine_verdict", s.machine_verdict},
              {"disagreement_ratio", s.disagreement_ratio ? json(*s.disagreement_ratio) : json(nullptr)},
              {"grader_unresolved", s.grader_unresolved}};
}

json audit_sample_result_to_json(const AuditSampleResult& r) {
  json items = json::array();
  for (const auto& s : r.items) items.push_back(audit_sample_to_json(s));
  return json{{"population", r.population}, {"sample_size", r.items.size()}, {"items", items}, {"warnings", r.warnings}};
}

// --- agreement ---------------------------------------------------------------

json adjudication_to_json(const AdjudicationRecord& a) {
  return json{{"sample_id", a.sample_id},           {"case_id", a.case_id}, {"clause_id", a.clause_id},
              {"machine_verdict", a.machine_verdict}, {"human_verdict", a.human_verdict},
              {"note", a.note},                     {"timestamp", a.timestamp}};
}

AdjudicationRecord adjudication_from_json(const json& j) {
  const std::string where = "adjudication";
  AdjudicationRecord a;
  a.sample_id = require_string(j, "sample_id", where);
  a.case_id = require_string(j, "case_id", where);
  a.clause_id = require_string(j, "clause_id", where);
  const json& m = require(j, "machine_verdict", where);
  const json& h = require(j, "human_verdict", where);
  if (!m.is_boolean() || !h.is_boolean()) throw Error(ErrorCode::syntax, where + ": verdicts must be booleans");
  a.machine_verdict = m.get<bool>();
  a.human_verdict = h.get<bool>();
  a.note = optional_string(j, "note", where);
  a.timestamp = optional_string(j, "timestamp", where);
  return a;
}

AgreementStats agreement_from_table(const ContingencyTable& table) {
  const std::size_t n = table.total();
  if (n == 0) throw Error(ErrorCode::empty, "no adjudications");
  const auto& c = table.counts;
  const std::size_t agree = c[0][0] + c[1][1];
  const std::size_t machine_met = c[1][0] + c[1][1];
  const std::size_t human_met = c[0][1] + c[1][1];
  const double nn = static_cast<double>(n);

  AgreementStats s;
  s.table = table;
  s.total = n;
  s.raw_agreement = static_cast<double>(agree) / nn;
  const double chance = static_cast<double>(machine_met * human_met + (n - machine_met) * (n - human_met));
  s.expected_agreement = chance / (nn * nn);
  const bool degenerate = (machine_met == n && human_met == n) || (machine_met == 0 && human_met == 0);
  if (degenerate) s.kappa = agree == n ? 1.0 : 0.0;
  else s.kappa = (s.raw_agreement - s.expected_agreement) / (1.0 - s.expected_agreement);
  return s;
}

AgreementStats agreement_stats(std::span<const AdjudicationRecord> adjudications) {
  ContingencyTable t;
  for (const auto& a : adjudications) ++t.counts[a.machine_verdict ? 1 : 0][a.human_verdict ? 1 : 0];
  return agreement_from_table(t);
}

json agreement_to_json(const AgreementStats& s) {
  const auto& c = s.table.counts;
  return json{{"total", s.total},
              {"raw_agreement", s.raw_agreement},
              {"expected_agreement", s.expected_agreement},
              {"kappa", s.kappa},
              {"contingency",
               {{"machine_met_human_met", c[1][1]},
                {"machine_met_human_unmet", c[1][0]},
                {"machine_unmet_human_met", c[0][1]},
                {"machine_unmet_human_unmet", c[0][0]}}}};
}

// --- equity ------------------------------------------------------------------

double two_proportion_z(std::size_t x1, std::size_t n1, std::size_t x2, std::size_t n2) {
  if (n1 == 0 || n2 == 0) return 0.0;
  const double p1 = static_cast<double>(x1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(x2) / static_cast<double>(n2);
  const double pooled = static_cast<double>(x1 + x2) / static_cast<double>(n1 + n2);
  const double var = pooled * (1.0 - pooled) * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2));
  if (var <= 0.0) return 0.0;
  return (p1 - p2) / std::sqrt(var);
}

namespace {

std::optional<std::string> render_value(const dsl::Value& v) {
  if (const auto* b = std::get_if<bool>(&v)) return std::string(*b ? "true" : "false");
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  const auto& q = std::get<dsl::Quantity>(v);
  json j = q.value;
  std::string out = j.dump();
  if (q.unit != dsl::Unit::none) out += " " + std::string(dsl::unit_name(q.unit));
  return out;
}

std::optional<std::string> group_of(const CaseRecord& c, std::string_view field) {
  if (field == "demographic_group") return c.demographic_group;
  if (field == "jurisdiction") return c.jurisdiction;
  auto from_map = [&](const std::map<std::string, dsl::Value>& m, std::string_view key) -> std::optional<std::string> {
    auto it = m.find(std::string(key));
    if (it == m.end()) return std::nullopt;
    return render_value(it->second);
  };
  if (field.starts_with("patient.")) return from_map(c.env.patient, field.substr(8));
  if (field.starts_with("context.")) return from_map(c.env.context, field.substr(8));
  throw Error(ErrorCode::invalid, "unsupported group field '" + std::string(field) +
                                      "' (use demographic_group, jurisdiction, patient.<key> or context.<key>)");
}

}  // namespace

EquityReport equity_report(std::span<const OverrideRecord> ledger, std::span<const CaseRecord> cases,
                           std::string_view group_field, const EquityThresholds& thresholds) {
  EquityReport report;
  report.group_field = std::string(group_field);
  report.thresholds = thresholds;

  std::set<std::string> overridden;
  for (const auto& r : ledger) overridden.insert(r.case_id);

  std::map<std::string, EquityGroup> groups;
  for (const auto& c : cases) {
    auto label = group_of(c, group_field);
    if (!label || label->empty()) {
      ++report.ungrouped_cases;
      continue;
    }
    EquityGroup& g = groups[*label];
    g.label = *label;
    ++g.case_count;
    if (overridden.count(c.case_id)) ++g.override_count;
  }
  if (groups.size() < 2) {
    throw Error(ErrorCode::no_groups, "equity analysis needs at least two groups on '" + std::string(group_field) + "'");
  }
  for (auto& [label, g] : groups) {
    g.rate = static_cast<double>(g.override_count) / static_cast<double>(g.case_count);
    g.sufficient = g.case_count >= thresholds.min_group_size;
    report.groups.push_back(g);
  }
  for (std::size_t i = 0; i < report.groups.size(); ++i) {
    for (std::size_t j = i + 1; j < report.groups.size(); ++j) {
      const auto& a = report.groups[i];
      const auto& b = report.groups[j];
      EquityPair p;
      p.group_a = a.label;
      p.group_b = b.label;
      const double hi = std::max(a.rate, b.rate);
      const double lo = std::min(a.rate, b.rate);
      if (lo > 0.0) p.rate_ratio = hi / lo;
      else if (hi == 0.0) p.rate_ratio = 1.0;
      p.z = two_proportion_z(a.override_count, a.case_count, b.override_count, b.case_count);
      p.insufficient_data = !(a.sufficient && b.sufficient);
      const bool ratio_hit = !p.rate_ratio || *p.rate_ratio >= thresholds.min_ratio;
      p.flagged = !p.insufficient_data && ratio_hit && std::abs(p.z) >= thresholds.min_abs_z;
      report.pairs.push_back(p);
    }
  }
  return report;
}

json equity_to_json(const EquityReport& r) {
  json groups = json::array();
  for (const auto& g : r.groups) {
    groups.push_back({{"group", g.label},
                      {"cases", g.case_count},
                      {"overrides", g.override_count},
                      {"rate", g.rate},
                      {"status", g.sufficient ? "OK" : "INSUFFICIENT_DATA"}});
  }
  json pairs = json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"group_a", p.group_a},
                     {"group_b", p.group_b},
                     {"rate_ratio", p.rate_ratio ? json(*p.rate_ratio) : json(nullptr)},
                     {"z", p.z},
                     {"flagged", p.flagged},
                     {"insufficient_data", p.insufficient_data}});
  }
  return json{{"group_field", r.group_field},
              {"groups", groups},
              {"pairs", pairs},
              {"ungrouped_cases", r.ungrouped_cases},
              {"thresholds",
               {{"min_ratio", r.thresholds.min_ratio},
                {"min_abs_z", r.thresholds.min_abs_z},
                {"min_group_size", r.thresholds.min_group_size}}},
              {"footer", "Pairwise tests are not corrected for multiple comparisons."}};
}

// --- coverage ----------------------------------------------------------------

const std::vector<std::string>& priority_conditions() {
  static const std::vector<std::string> kConditions{"hiv", "lymphatic_filariasis", "malaria", "schistosomiasis",
                                                    "trachoma"};
  return kConditions;
}

std::map<std::string, double> uniform_targets(const std::vector<std::string>& conditions) {
  std::map<std::string, double> out;
  if (conditions.empty()) return out;
  const double each = 1.0 / static_cast<double>(conditions.size());
  for (const auto& c : conditions) out[c] = each;
  return out;
}

CoverageReport coverage_report(std::span<const CaseRecord> cases, const std::map<std::string, double>& targets,
                               double cap) {
  if (cases.empty()) throw Error(ErrorCode::empty, "no cases for coverage");
  double sum = 0.0;
  for (const auto& [c, t] : targets) {
    if (!(t >= 0.0)) throw Error(ErrorCode::bad_targets, "target for " + c + " must be non-negative");
    sum += t;
  }
  if (sum > 1.0 + 1e-9) throw Error(ErrorCode::bad_targets, "targets sum to more than 1");

  std::map<std::string, std::size_t> counts;
  for (const auto& c : cases) {
    for (const auto& tag : c.condition_tags) ++counts[tag];
  }
  for (const auto& [c, t] : targets) counts.try_emplace(c, 0);

  CoverageReport r;
  r.total = cases.size();
  const double n = static_cast<double>(r.total);
  for (const auto& [condition, count] : counts) {
    ConditionCoverage cc;
    cc.condition = condition;
    cc.count = count;
    cc.share = static_cast<double>(count) / n;
    if (auto it = targets.find(condition); it != targets.end()) {
      cc.target = it->second;
      if (count == 0) {
        cc.parity_weight = cap;
        cc.capped = true;
        r.warnings.push_back("NO_CASES:" + condition);
      } else {
        const double raw = it->second * n / static_cast<double>(count);
        cc.capped = raw > cap;
        cc.parity_weight = std::min(cap, raw);
      }
      r.parity_weights[condition] = *cc.parity_weight;
    }
    r.conditions.push_back(std::move(cc));
  }
  return r;
}

json coverage_to_json(const CoverageReport& r) {
  json conditions = json::array();
  for (const auto& c : r.conditions) {
    conditions.push_back({{"condition", c.condition},
                          {"count", c.count},
                          {"share", c.share},
                          {"share_percent", std::round(c.share * 1e4) / 1e2},
                          {"target", c.target ? json(*c.target) : json(nullptr)},
                          {"parity_weight", c.parity_weight ? json(*c.parity_weight) : json(nullptr)},
                          {"parity_weight_2dp",
                           c.parity_weight ? json(std::round(*c.parity_weight * 100.0) / 100.0) : json(nullptr)},
                          {"capped", c.capped}});
  }
  json weights = json::object();
  for (const auto& [k, v] : r.parity_weights) weights[k] = v;
  return json{{"total", r.total}, {"conditions", conditions}, {"parity_weights", weights}, {"warnings", r.warnings}};
}

std::map<std::string, double> parse_targets(std::string_view document_text) {
  const json doc = parse_json_document(document_text);
  if (doc.is_array()) {
    std::vector<std::string> conditions;
    for (const auto& c : doc) {
      if (!c.is_string()) throw Error(ErrorCode::syntax, "targets array must contain condition names");
      conditions.push_back(c.get<std::string>());
    }
    return uniform_targets(conditions);
  }
  if (!doc.is_object()) throw Error(ErrorCode::syntax, "targets must be an object or an array of conditions");
  std::map<std::string, double> out;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!it->is_number()) throw Error(ErrorCode::syntax, "target for " + it.key() + " must be a number");
    out[it.key()] = it->get<double>();
  }
  return out;
}

// --- misgrades ---------------------------------------------------------------

json misgrade_to_json(const MisgradeEntry& e) {
  return json{{"entry_id", e.entry_id},
              {"case_id", e.case_id},
              {"clause_id", e.clause_id},
              {"machine_verdict", e.machine_verdict},
              {"human_verdict", e.human_verdict},
              {"status", e.status == MisgradeStatus::open ? "open" : "resolved"},
              {"note", e.note},
              {"occurrences", e.occurrences},
              {"sample_ids", e.sample_ids}};
}

MisgradeEntry misgrade_from_json(const json& j) {
  const std::string where = "misgrade entry";
  MisgradeEntry e;
  e.entry_id = require_string(j, "entry_id", where);
  e.case_id = require_string(j, "case_id", where);
  e.clause_id = require_string(j, "clause_id", where);
  e.machine_verdict = j.value("machine_verdict", false);
  e.human_verdict = j.value("human_verdict", false);
  const std::string status = require_string(j, "status", where);
  if (status != "open" && status != "resolved") throw Error(ErrorCode::syntax, where + ": bad status");
  e.status = status == "open" ? MisgradeStatus::open : MisgradeStatus::resolved;
  e.note = optional_string(j, "note", where);
  e.occurrences = j.value("occurrences", std::size_t{1});
  e.sample_ids = string_list(j, "sample_ids", where);
  return e;
}

const MisgradeEntry* MisgradeTracker::find(std::string_view entry_id) const {
  for (const auto& e : entries_) {
    if (e.entry_id == entry_id) return &e;
  }
  return nullptr;
}

const MisgradeEntry* MisgradeTracker::find(std::string_view case_id, std::string_view clause_id) const {
  for (const auto& e : entries_) {
    if (e.case_id == case_id && e.clause_id == clause_id) return &e;
  }
  return nullptr;
}

std::optional<MisgradeEntry> MisgradeTracker::record(const AdjudicationRecord& a) {
  if (a.machine_verdict == a.human_verdict) return std::nullopt;
  for (auto& e : entries_) {
    if (e.case_id == a.case_id && e.clause_id == a.clause_id) {
      ++e.occurrences;
      e.sample_ids.push_back(a.sample_id);
      return e;
    }
  }
  std::string id = std::to_string(entries_.size() + 1);
  id.insert(0, id.size() < 4 ? 4 - id.size() : 0, '0');
  MisgradeEntry e;
  e.entry_id = "MG-" + id;
  e.case_id = a.case_id;
  e.clause_id = a.clause_id;
  e.machine_verdict = a.machine_verdict;
  e.human_verdict = a.human_verdict;
  e.note = a.note;
  e.sample_ids.push_back(a.sample_id);
  entries_.push_back(e);
  return e;
}

const MisgradeEntry& MisgradeTracker::resolve(std::string_view entry_id, std::string note) {
  for (auto& e : entries_) {
    if (e.entry_id != entry_id) continue;
    if (e.status == MisgradeStatus::resolved) {
      throw Error(ErrorCode::invalid, "misgrade " + e.entry_id + " is already resolved");
    }
    e.status = MisgradeStatus::resolved;
    if (!note.empty()) e.note = std::move(note);
    return e;
  }
  throw Error(ErrorCode::not_found, "no misgrade entry '" + std::string(entry_id) + "'");
}

MisgradeTracker MisgradeTracker::from_ndjson(std::string_view text) {
  MisgradeTracker t;
  for (const auto& j : parse_ndjson(text)) {
    MisgradeEntry e = misgrade_from_json(j);
    auto it = std::find_if(t.entries_.begin(), t.entries_.end(), [&](const auto& x) { return x.entry_id == e.entry_id; });
    if (it == t.entries_.end()) t.entries_.push_back(std::move(e));
    else *it = std::move(e);
  }
  return t;
}

std::optional<MisgradeEntry> record_misgrade(MisgradeTracker& tracker, const AdjudicationRecord& adjudication) {
  return tracker.record(adjudication);
}

}  // namespace guidescore
