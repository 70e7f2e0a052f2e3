#include <catch_amalgamated.hpp>

#include <random>

#include "guidescore/error.hpp"
#include "guidescore/scoring.hpp"
#include "support/fixtures.hpp"

using namespace guidescore;
using dsl::TriState;

namespace {

const ClauseOutcome& outcome(const ScoreReport& r, const std::string& id) {
  for (const auto& o : r.outcomes) {
    if (o.clause_id == id) return o;
  }
  FAIL("no outcome for " << id);
  throw std::logic_error("unreachable");
}

ScoreReport report_with(const std::string& id, std::optional<double> normalized, std::vector<std::string> tags) {
  ScoreReport r;
  r.case_id = id;
  r.registry_version = "2025-Q3";
  r.normalized = normalized;
  r.condition_tags = std::move(tags);
  return r;
}

// --- randomized worlds with a known answer key -------------------------------

enum class Fact { yes, no, missing };

struct PlannedOverride {
  std::string reason;
  bool sanctioned = false;
  Fact precondition = Fact::yes;
  bool justified = true;
  double adjusted = 0.0;
};

struct PlannedClause {
  Tier tier;
  Polarity polarity;
  bool global = true;
  std::string jurisdiction;  // when not global
  Fact applies = Fact::yes;  // fact behind applies_when, or yes when applies_when is `true`
  bool applies_is_literal = true;
  Fact condition = Fact::yes;
  std::vector<PlannedOverride> requests;
};

struct World {
  std::vector<PlannedClause> clauses;
  std::vector<OverrideEntry> ontology;
};

Fact random_fact(std::mt19937_64& rng) { return static_cast<Fact>(std::uniform_int_distribution<int>(0, 2)(rng)); }

void set_fact(std::map<std::string, dsl::Value>& m, const std::string& key, Fact f) {
  if (f != Fact::missing) m[key] = (f == Fact::yes);
}

std::string cid(std::size_t i) { return "WHO-Synthetic-2025-Rec-" + std::to_string(i); }

// Independent answer key: points per clause straight from the weight table,
// polarity, three-valued satisfaction and the override rules.
struct Expected {
  std::int64_t earned_ticks = 0;
  std::int64_t max_ticks = 0;
};

std::int64_t weight_ticks(Tier t) { return t == Tier::high ? 30000 : t == Tier::moderate ? 20000 : 10000; }

Expected answer_key(const World& w, const std::string& case_jurisdiction) {
  Expected e;
  for (const auto& pc : w.clauses) {
    const bool in_scope = pc.global || pc.jurisdiction == case_jurisdiction;
    if (!in_scope || pc.applies != Fact::yes) continue;
    const std::int64_t weight = weight_ticks(pc.tier);
    if (pc.polarity == Polarity::reward) {
      e.max_ticks += weight;
      if (pc.condition == Fact::yes) e.earned_ticks += weight;
      continue;
    }
    if (pc.condition != Fact::yes) continue;
    std::int64_t points = -weight;
    for (const auto& r : pc.requests) {
      if (r.sanctioned && r.precondition == Fact::yes && r.justified) {
        points = std::max(points, static_cast<std::int64_t>(std::llround(r.adjusted * 10000)));
        break;
      }
    }
    e.earned_ticks += points;
  }
  return e;
}

struct Materialized {
  Registry registry;
  OverrideOntology ontology;
};

Materialized materialize(const World& w, const std::vector<GuidelineClause>& extra = {}) {
  std::vector<GuidelineClause> clauses;
  for (std::size_t i = 0; i < w.clauses.size(); ++i) {
    const auto& pc = w.clauses[i];
    const std::string applies = pc.applies_is_literal ? "true" : "value(a" + std::to_string(i) + ") == true";
    auto c = fixtures::clause(cid(i), pc.tier, pc.polarity, "value(c" + std::to_string(i) + ") == true", applies,
                              pc.global ? std::vector<std::string>{"GLOBAL"} : std::vector<std::string>{pc.jurisdiction});
    clauses.push_back(std::move(c));
  }
  for (const auto& c : extra) clauses.push_back(c);
  return {Registry::build("2025-Q3", 2025, std::move(clauses)), OverrideOntology(w.ontology)};
}

CaseRecord materialize_case(const World& w, const std::string& id, const std::string& jurisdiction) {
  CaseRecord c = fixtures::dialogue(id, 2, jurisdiction);
  for (std::size_t i = 0; i < w.clauses.size(); ++i) {
    const auto& pc = w.clauses[i];
    if (!pc.applies_is_literal) set_fact(c.env.assertions, "a" + std::to_string(i), pc.applies);
    set_fact(c.env.assertions, "c" + std::to_string(i), pc.condition);
    for (const auto& r : pc.requests) {
      set_fact(c.env.context, "ok_r" + r.reason.substr(1), r.precondition);
      c.override_requests.push_back({r.reason, cid(i), r.justified ? "Documented local constraint" : "  ", "", "", "", ""});
    }
  }
  return c;
}

}  // namespace

TEST_CASE("tier weight table", "[scoring]") {
  CHECK(tier_weight(Tier::high, Polarity::reward) == Points::whole(3));
  CHECK(tier_weight(Tier::high, Polarity::penalize) == Points::whole(-3));
  CHECK(tier_weight(Tier::moderate, Polarity::reward) == Points::whole(2));
  CHECK(tier_weight(Tier::moderate, Polarity::penalize) == Points::whole(-2));
  CHECK(tier_weight(Tier::low, Polarity::reward) == Points::whole(1));
  CHECK(tier_weight(Tier::low, Polarity::penalize) == Points::whole(-1));
}

TEST_CASE("composite case with a sanctioned shortage override", "[scoring]") {
  const ScoreReport r = score_case(fixtures::registry(), fixtures::ontology(), fixtures::case_named("case-composite"));
  CHECK(outcome(r, "WHO-Pneumonia-2023-Rec-3.2.1").adjusted_points == Points::whole(3));
  CHECK(outcome(r, "WHO-Pneumonia-2023-Rec-3.3").adjusted_points == Points::whole(0));
  const ClauseOutcome& pen = outcome(r, "WHO-Pneumonia-2023-Rec-3.2.2");
  CHECK(pen.base_points == Points::whole(-3));
  CHECK(pen.adjusted_points == Points::from_ticks(-5000));
  CHECK(pen.override_ref == std::optional<std::string>("BETA_LACTAM_SHORTAGE"));
  // 3 + 0 - 0.5 earned of 3 + 2 possible.
  CHECK(r.earned == Points::from_ticks(25000));
  CHECK(r.max_positive == Points::whole(5));
  REQUIRE(r.normalized);
  CHECK(*r.normalized == 0.5);
  CHECK(r.earned.to_string() == "2.5");
  CHECK(r.trace == std::vector<std::string>{"WHO-Pneumonia-2023-Rec-3.2.1", "WHO-Pneumonia-2023-Rec-3.2.2",
                                            "WHO-Pneumonia-2023-Rec-3.3"});
}

TEST_CASE("all reward clauses met", "[scoring]") {
  const ScoreReport r = score_case(fixtures::registry(), fixtures::ontology(), fixtures::case_named("case-pregnancy-ke"));
  CHECK(r.normalized == std::optional<double>(1.0));
}

TEST_CASE("no applicable clauses", "[scoring]") {
  const ScoreReport r = score_case(fixtures::registry(), fixtures::ontology(), fixtures::case_named("case-hiv"));
  CHECK_FALSE(r.normalized);
  CHECK(r.earned.is_zero());
  CHECK(report_to_json(r)["normalized"] == "NOT_APPLICABLE");
}

TEST_CASE("normalize_score", "[scoring]") {
  CHECK(normalize_score(Points::from_ticks(25000), Points::whole(5)) == std::optional<double>(0.5));
  CHECK(normalize_score(Points::whole(-3), Points::whole(5)) == std::optional<double>(0.0));
  CHECK_FALSE(normalize_score(Points::whole(0), Points::whole(0)));
  CHECK(normalize_score(Points::whole(7), Points::whole(5)) == std::optional<double>(1.0));
}

TEST_CASE("unknown satisfaction scores zero and flags", "[scoring]") {
  CaseRecord c = fixtures::case_named("case-composite");
  c.env.assertions.erase("antibiotic.duration");
  const ScoreReport r = score_case(fixtures::registry(), fixtures::ontology(), c);
  const ClauseOutcome& o = outcome(r, "WHO-Pneumonia-2023-Rec-3.3");
  CHECK(o.met_or_triggered == TriState::unknown);
  CHECK(o.adjusted_points.is_zero());
  CHECK(o.insufficiency_flag);
  CHECK(r.max_positive == Points::whole(5));
}

TEST_CASE("verdict() defers to the grader panel", "[scoring]") {
  const Registry reg = fixtures::registry();
  CaseRecord c = fixtures::case_named("case-croup-2023");
  ScoreReport r = score_case(reg, fixtures::ontology(), c);
  const ClauseOutcome& o = outcome(r, "AAP-Croup-2022-Rec-2.1");
  CHECK(o.met_or_triggered == TriState::true_);
  CHECK(o.adjusted_points == Points::whole(2));
  REQUIRE(o.grader_disagreement);
  CHECK(*o.grader_disagreement == Catch::Approx(1.0 / 3.0));

  c.grader_verdicts["AAP-Croup-2022-Rec-2.1"] = {true, false};
  r = score_case(reg, fixtures::ontology(), c);
  CHECK(outcome(r, "AAP-Croup-2022-Rec-2.1").met_or_triggered == TriState::unknown);
  CHECK(outcome(r, "AAP-Croup-2022-Rec-2.1").grader_unresolved);
  CHECK(outcome(r, "AAP-Croup-2022-Rec-2.1").insufficiency_flag);

  c.grader_verdicts.clear();
  try {
    score_case(reg, fixtures::ontology(), c);
    FAIL("scored without verdicts");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::verdict_missing);
  }
}

TEST_CASE("a jurisdiction-excluded clause contributes nothing", "[scoring]") {
  const ScoreReport ke = score_case(fixtures::registry(), fixtures::ontology(), fixtures::case_named("case-pregnancy-ke"));
  const ClauseOutcome& flu = outcome(ke, "CDC-Influenza-2024-Rec-1");
  CHECK_FALSE(flu.applicable);
  CHECK(flu.reason == ApplicabilityReason::jurisdiction);
  CHECK(flu.adjusted_points.is_zero());
  CHECK(ke.max_positive == Points::whole(2));
}

TEST_CASE("rejected override keeps the base penalty", "[scoring]") {
  CaseRecord c = fixtures::case_named("case-composite");
  c.env.formulary["amoxicillin"] = dsl::FormularyStatus::available;
  const ScoreReport r = score_case(fixtures::registry(), fixtures::ontology(), c);
  const ClauseOutcome& pen = outcome(r, "WHO-Pneumonia-2023-Rec-3.2.2");
  CHECK(pen.adjusted_points == Points::whole(-3));
  CHECK(pen.override_rejection == std::optional<OverrideRejection>(OverrideRejection::precondition_failed));
  CHECK_FALSE(pen.override_ref);
  CHECK(accepted_overrides(c, r).empty());
}

TEST_CASE("report json round-trips byte for byte", "[scoring]") {
  for (const auto& r : score_run(fixtures::registry(), fixtures::ontology(), fixtures::cases())) {
    CHECK(report_bytes(report_from_json(parse_json_document(report_bytes(r)))) == report_bytes(r));
  }
}

TEST_CASE("aggregate_run", "[scoring][aggregate]") {
  std::vector<ScoreReport> one{report_with("a", 0.5, {})};
  CHECK(aggregate_run(one, {}).weighted_mean == std::optional<double>(0.5));

  std::vector<ScoreReport> two{report_with("a", 1.0, {"pneumonia"}), report_with("b", 0.0, {"malaria"})};
  const RunSummary s = aggregate_run(two, {{"malaria", 3.0}});
  REQUIRE(s.weighted_mean);
  CHECK(*s.weighted_mean == Catch::Approx((1.0 * 1 + 0.0 * 3) / 4).margin(1e-12));
  CHECK(s.total_weight == 4.0);

  std::vector<ScoreReport> with_na{report_with("a", 0.5, {}), report_with("b", std::nullopt, {})};
  const RunSummary na = aggregate_run(with_na, {});
  CHECK(na.weighted_mean == std::optional<double>(0.5));
  CHECK(na.scored_count == 1);

  CHECK(case_weight_for({"hiv", "malaria"}, {{"hiv", 2.0}, {"malaria", 4.0}}) == 4.0);
  CHECK(case_weight_for({"pneumonia"}, {{"hiv", 2.0}}) == 1.0);

  try {
    aggregate_run(std::vector<ScoreReport>{}, {});
    FAIL("aggregated an empty run");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_run);
  }
}

TEST_CASE("aggregate breakdowns over the fixture run", "[scoring][aggregate]") {
  const auto reports = score_run(fixtures::registry(), fixtures::ontology(), fixtures::cases());
  const RunSummary s = aggregate_run(reports, {});
  CHECK(s.case_count == 5);
  CHECK(s.scored_count == 4);
  CHECK(s.per_jurisdiction.at("KE").cases == 2);
  CHECK(s.per_condition.at("pregnancy").weighted_mean == std::optional<double>(1.0));
  CHECK(s.per_tier.at("high").applicable == 2);
  CHECK(s.per_tier.at("high").earned == Points::from_ticks(25000));
}

TEST_CASE("10,000 randomized cases uphold the scoring invariants", "[scoring][property]") {
  std::mt19937_64 rng(424242);
  const Points w_high = Points::whole(3);
  std::size_t cases_checked = 0;
  std::string run_one, run_two;

  for (int world_index = 0; world_index < 500; ++world_index) {
    World w;
    const int n = std::uniform_int_distribution<int>(1, 8)(rng);
    for (int i = 0; i < n; ++i) {
      const std::string reason = "R" + std::to_string(i);
      const double adjusted[] = {0.0, -0.25, -0.5, -1.0, -2.0, -3.0};
      OverrideEntry entry;
      entry.reason_code = reason;
      entry.description = "synthetic";
      entry.precondition_text = "context(ok_r" + std::to_string(i) + ") == true";
      entry.adjusted_penalty = Points::from_double(adjusted[std::uniform_int_distribution<int>(0, 5)(rng)]);
      const bool sanctioned = std::uniform_int_distribution<int>(0, 3)(rng) != 0;
      if (sanctioned) entry.applicable_clause_ids = {cid(i)};
      w.ontology.push_back(entry);
    }
    w.clauses.resize(n);

    for (int case_index = 0; case_index < 20; ++case_index) {
      for (int i = 0; i < n; ++i) {
        PlannedClause& pc = w.clauses[i];
        pc.tier = static_cast<Tier>(std::uniform_int_distribution<int>(0, 2)(rng));
        pc.polarity = std::uniform_int_distribution<int>(0, 2)(rng) == 0 ? Polarity::penalize : Polarity::reward;
        pc.global = std::uniform_int_distribution<int>(0, 2)(rng) != 0;
        pc.jurisdiction = std::uniform_int_distribution<int>(0, 1)(rng) ? "KE" : "US";
        pc.applies_is_literal = std::uniform_int_distribution<int>(0, 1)(rng) == 0;
        pc.applies = pc.applies_is_literal ? Fact::yes : random_fact(rng);
        pc.condition = random_fact(rng);
        pc.requests.clear();
        if (pc.polarity == Polarity::penalize && std::uniform_int_distribution<int>(0, 1)(rng)) {
          const OverrideEntry& entry = w.ontology[i];
          PlannedOverride po;
          po.reason = entry.reason_code;
          po.sanctioned = !entry.applicable_clause_ids.empty();
          po.precondition = random_fact(rng);
          po.justified = std::uniform_int_distribution<int>(0, 4)(rng) != 0;
          po.adjusted = entry.adjusted_penalty.to_double();
          pc.requests.push_back(po);
        }
      }
      const std::string jurisdiction = std::uniform_int_distribution<int>(0, 1)(rng) ? "KE" : "US";
      const Materialized m = materialize(w);
      const CaseRecord c = materialize_case(w, "case-" + std::to_string(world_index) + "-" + std::to_string(case_index),
                                            jurisdiction);
      const ScoreReport r = score_case(m.registry, m.ontology, c);
      const Expected want = answer_key(w, jurisdiction);

      // Answer key.
      REQUIRE(r.earned.ticks() == want.earned_ticks);
      REQUIRE(r.max_positive.ticks() == want.max_ticks);
      if (want.max_ticks == 0) {
        REQUIRE_FALSE(r.normalized);
      } else {
        REQUIRE(r.normalized);
        const double ratio = static_cast<double>(want.earned_ticks) / static_cast<double>(want.max_ticks);
        REQUIRE(*r.normalized == std::clamp(ratio, 0.0, 1.0));
      }
      // Range and report-level sums.
      if (r.normalized) REQUIRE((*r.normalized >= 0.0 && *r.normalized <= 1.0));
      Points sum_adjusted, pen_base, pen_adjusted;
      for (const auto& o : r.outcomes) {
        REQUIRE(o.base_points.abs() <= w_high);
        REQUIRE(o.adjusted_points.abs() <= o.base_points.abs());
        REQUIRE((o.adjusted_points.sign() == o.base_points.sign() || o.adjusted_points.is_zero()));
        if (!o.applicable) {
          REQUIRE(o.adjusted_points.is_zero());
          continue;
        }
        sum_adjusted += o.adjusted_points;
        if (o.polarity == Polarity::penalize && o.met_or_triggered == TriState::true_) {
          pen_base += o.base_points;
          pen_adjusted += o.adjusted_points;
          REQUIRE(o.base_points <= o.adjusted_points);
          REQUIRE(o.adjusted_points <= Points{});
          if (!o.override_ref) REQUIRE(o.adjusted_points == o.base_points);
        }
      }
      REQUIRE(sum_adjusted == r.earned);
      REQUIRE(pen_adjusted >= pen_base);

      // Monotonicity: one extra always-applicable clause of each kind.
      const Tier extra_tier = static_cast<Tier>(std::uniform_int_distribution<int>(0, 2)(rng));
      const auto extra = [&](Polarity p, const char* cond) {
        return fixtures::clause("WHO-Extra-2025-Rec-1", extra_tier, p, cond);
      };
      const Materialized met = materialize(w, {extra(Polarity::reward, "true")});
      const Materialized unmet = materialize(w, {extra(Polarity::reward, "false")});
      const Materialized triggered = materialize(w, {extra(Polarity::penalize, "true")});
      const auto n_met = score_case(met.registry, met.ontology, c).normalized;
      const auto n_unmet = score_case(unmet.registry, unmet.ontology, c).normalized;
      const auto n_trig = score_case(triggered.registry, triggered.ontology, c).normalized;
      REQUIRE(n_met);
      REQUIRE(n_unmet);
      if (r.normalized) {
        REQUIRE(*n_met >= *r.normalized);
        REQUIRE(*n_unmet <= *r.normalized);
        REQUIRE(n_trig);
        REQUIRE(*n_trig <= *r.normalized);
      }

      // Determinism: a second scoring is byte-identical.
      run_one += report_bytes(r);
      run_two += report_bytes(score_case(m.registry, m.ontology, c));
      ++cases_checked;
    }
  }
  CHECK(cases_checked == 10000);
  CHECK(sha256_hex(run_one) == sha256_hex(run_two));
}
