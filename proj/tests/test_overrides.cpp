#include <catch_amalgamated.hpp>

#include <random>

#include "guidescore/error.hpp"
#include "guidescore/overrides.hpp"
#include "guidescore/whatif.hpp"
#include "support/fixtures.hpp"

using namespace guidescore;

namespace {

const std::string kWard7 =
    "Amoxicillin unavailable on Ward 7; used doxycycline per hospital policy PH-ABX-2024-14";
const std::string kPenaltyClause = "WHO-Pneumonia-2023-Rec-3.2.2";

OverrideRecord shortage_request(std::string justification = kWard7) {
  return OverrideRecord{"BETA_LACTAM_SHORTAGE", kPenaltyClause, std::move(justification), "2025-03-02T10:00:00Z",
                        "case-composite", "", ""};
}

dsl::EvaluationEnv formulary(dsl::FormularyStatus s) {
  dsl::EvaluationEnv env;
  env.formulary["amoxicillin"] = s;
  return env;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::io;
}

OverrideRecord ledger_record(int i) {
  return OverrideRecord{"BETA_LACTAM_SHORTAGE", kPenaltyClause, "justification " + std::to_string(i),
                        "2025-03-0" + std::to_string(1 + i % 9) + "T10:00:00Z", "case-" + std::to_string(i), "", ""};
}

}  // namespace

TEST_CASE("ontology loads the shortage reason", "[overrides][ontology]") {
  const OverrideOntology o = fixtures::ontology();
  const OverrideEntry* e = o.find("BETA_LACTAM_SHORTAGE");
  REQUIRE(e);
  CHECK(e->adjusted_penalty == Points::from_ticks(-5000));
  CHECK(e->precondition_text == R"(formulary(amoxicillin) == "shortage")");
  CHECK(dsl::evaluate_expression(e->precondition, formulary(dsl::FormularyStatus::shortage)) == dsl::TriState::true_);
}

TEST_CASE("ontology validation", "[overrides][ontology]") {
  const auto entry = [](const char* code, double penalty) {
    return json{{"reason_code", code},
                {"description", "d"},
                {"precondition", "true"},
                {"adjusted_penalty", penalty},
                {"applicable_clause_ids", json::array()}};
  };
  CHECK(code_of([&] { load_ontology(json::array({entry("X", -1), entry("X", -2)}).dump()); }) == ErrorCode::dup_reason);
  CHECK(code_of([&] { load_ontology(json::array({entry("X", 1)}).dump()); }) == ErrorCode::bad_penalty);
  CHECK(code_of([&] { load_ontology(json::array({entry("X", -3.5)}).dump()); }) == ErrorCode::bad_penalty);
  CHECK(code_of([&] { load_ontology("[{\"reason_code\": 3}]"); }) == ErrorCode::syntax);
  CHECK(code_of([&] { load_ontology("{"); }) == ErrorCode::syntax);
  json bad = entry("X", -1);
  bad["precondition"] = "formulary(amoxicillin ==";
  CHECK(code_of([&] { load_ontology(json::array({bad}).dump()); }) == ErrorCode::expr);
  CHECK(load_ontology(json::array({entry("X", -3), entry("Y", 0)}).dump()).entries().size() == 2);
}

TEST_CASE("apply_override examples", "[overrides][apply]") {
  const OverrideOntology o = fixtures::ontology();
  const Points base = Points::whole(-3);

  const OverrideDecision ok = apply_override(base, shortage_request(), o, formulary(dsl::FormularyStatus::shortage));
  CHECK(ok.accepted);
  CHECK(ok.adjusted_points == Points::from_ticks(-5000));

  const OverrideDecision available =
      apply_override(base, shortage_request(), o, formulary(dsl::FormularyStatus::available));
  CHECK_FALSE(available.accepted);
  CHECK(available.adjusted_points == base);
  CHECK(available.rejection == std::optional<OverrideRejection>(OverrideRejection::precondition_failed));

  const OverrideDecision unknown = apply_override(base, shortage_request(), o, {});
  CHECK(unknown.rejection == std::optional<OverrideRejection>(OverrideRejection::precondition_failed));

  const OverrideDecision blank = apply_override(base, shortage_request(""), o, formulary(dsl::FormularyStatus::shortage));
  CHECK_FALSE(blank.accepted);
  CHECK(blank.adjusted_points == base);
  CHECK(blank.rejection == std::optional<OverrideRejection>(OverrideRejection::no_justification));

  OverrideRecord other = shortage_request();
  other.clause_id = "WHO-Pneumonia-2023-Rec-3.2.1";
  CHECK(apply_override(base, other, o, formulary(dsl::FormularyStatus::shortage)).rejection ==
        std::optional<OverrideRejection>(OverrideRejection::unsanctioned));
  other = shortage_request();
  other.reason_code = "NOT_IN_ONTOLOGY";
  CHECK(apply_override(base, other, o, formulary(dsl::FormularyStatus::shortage)).rejection ==
        std::optional<OverrideRejection>(OverrideRejection::unsanctioned));

  CHECK(code_of([&] { apply_override(Points::whole(2), shortage_request(), o, {}); }) == ErrorCode::positive_base);
}

TEST_CASE("a clause can sanction a reason the entry does not list", "[overrides][apply]") {
  const OverrideOntology o = load_ontology(
      R"([{"reason_code": "STOCKOUT", "description": "d", "precondition": "true", "adjusted_penalty": -1, "applicable_clause_ids": []}])");
  GuidelineClause clause = fixtures::clause("WHO-Stock-2024-Rec-1", Tier::high, Polarity::penalize, "true");
  OverrideRecord r{"STOCKOUT", clause.id, "no stock", "", "", "", ""};
  CHECK_FALSE(apply_override(Points::whole(-3), r, o, {}, &clause).accepted);
  clause.sanctioned_reasons = {"STOCKOUT"};
  CHECK(apply_override(Points::whole(-3), r, o, {}, &clause).adjusted_points == Points::whole(-1));
}

TEST_CASE("an ontology entry never deepens a penalty", "[overrides][apply]") {
  const OverrideOntology o = load_ontology(
      R"([{"reason_code": "R", "description": "d", "precondition": "true", "adjusted_penalty": -3, "applicable_clause_ids": ["WHO-Low-2024-Rec-1"]}])");
  const OverrideRecord r{"R", "WHO-Low-2024-Rec-1", "why", "", "", "", ""};
  const OverrideDecision d = apply_override(Points::whole(-1), r, o, {});
  CHECK(d.accepted);
  CHECK(d.adjusted_points == Points::whole(-1));
}

TEST_CASE("accepted overrides stay within [base, 0]", "[overrides][apply][property]") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 2000; ++i) {
    const std::int64_t base_ticks = -10000 * std::uniform_int_distribution<int>(0, 3)(rng);
    const std::int64_t adj_ticks = -2500 * std::uniform_int_distribution<int>(0, 12)(rng);
    json doc = json::array({{{"reason_code", "R"},
                             {"description", "d"},
                             {"precondition", "true"},
                             {"adjusted_penalty", static_cast<double>(adj_ticks) / 10000},
                             {"applicable_clause_ids", json::array({"WHO-X-2024-Rec-1"})}}});
    const OverrideOntology o = load_ontology(doc.dump());
    const bool justified = std::uniform_int_distribution<int>(0, 1)(rng);
    const OverrideRecord r{"R", "WHO-X-2024-Rec-1", justified ? "why" : "", "", "", "", ""};
    const Points base = Points::from_ticks(base_ticks);
    const OverrideDecision d = apply_override(base, r, o, {});
    REQUIRE(d.adjusted_points.sign() <= 0);
    if (d.accepted) {
      REQUIRE(base <= d.adjusted_points);
      REQUIRE(d.adjusted_points == std::max(base, Points::from_ticks(adj_ticks)));
    } else {
      REQUIRE(d.adjusted_points == base);
    }
  }
}

TEST_CASE("ledger append and verify", "[overrides][ledger]") {
  OverrideLedger ledger;
  const OverrideRecord& first = ledger.append(ledger_record(0));
  CHECK(first.prev_hash == kGenesisHash);
  CHECK(first.hash == sha256_hex(kGenesisHash + canonical_record_bytes(first)));
  CHECK(first.hash.size() == 64);

  ledger = append_override(ledger, ledger_record(1));
  REQUIRE(ledger.size() == 2);
  CHECK(ledger.entries()[1].prev_hash == ledger.entries()[0].hash);
  CHECK(ledger.entries()[0].case_id == "case-0");
  CHECK(ledger.entries()[1].case_id == "case-1");
  CHECK(ledger.verify().ok);

  OverrideRecord wrong = ledger_record(2);
  wrong.prev_hash = kGenesisHash;
  CHECK(code_of([&] { ledger.append(wrong); }) == ErrorCode::hash_chain);
  CHECK(code_of([&] { ledger.append(OverrideRecord{"R", "C", " ", "", "", "", ""}); }) == ErrorCode::invalid);
  CHECK(ledger.size() == 2);
}

TEST_CASE("canonical bytes are sorted-key JSON without hash fields", "[overrides][ledger]") {
  OverrideRecord r = ledger_record(3);
  r.prev_hash = "ab";
  r.hash = "cd";
  CHECK(canonical_record_bytes(r) ==
        R"({"case_id":"case-3","clause_id":"WHO-Pneumonia-2023-Rec-3.2.2","justification":"justification 3",)"
        R"("reason_code":"BETA_LACTAM_SHORTAGE","timestamp":"2025-03-04T10:00:00Z"})");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("tampering with entry k breaks verification", "[overrides][ledger]") {
  OverrideLedger ledger;
  for (int i = 0; i < 6; ++i) ledger.append(ledger_record(i));
  const std::string text = ledger.to_ndjson();

  for (std::size_t k = 0; k < 5; ++k) {
    // Rewrite a field and its own hash: the break shows at k + 1.
    std::vector<json> lines = parse_ndjson(text);
    lines[k]["justification"] = "edited";
    OverrideRecord edited = override_record_from_json(lines[k]);
    lines[k]["hash"] = chain_digest(edited.prev_hash, edited);
    std::string rebuilt;
    for (const auto& l : lines) rebuilt += l.dump() + "\n";
    const LedgerVerification v = OverrideLedger::from_ndjson(rebuilt).verify();
    CHECK_FALSE(v.ok);
    CHECK(v.first_bad_index == k + 1);
  }
}

TEST_CASE("single-bit mutations, reorders and removals are detected", "[overrides][ledger][property]") {
  OverrideLedger ledger;
  for (int i = 0; i < 8; ++i) ledger.append(ledger_record(i));
  REQUIRE(ledger.verify().ok);
  const std::string text = ledger.to_ndjson();
  REQUIRE(OverrideLedger::from_ndjson(text).verify().ok);

  std::mt19937_64 rng(17);
  std::size_t detected = 0, mutations = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    std::string mutated = text;
    const std::size_t pos = std::uniform_int_distribution<std::size_t>(0, mutated.size() - 1)(rng);
    mutated[pos] = static_cast<char>(mutated[pos] ^ (1 << std::uniform_int_distribution<int>(0, 6)(rng)));
    ++mutations;
    try {
      const OverrideLedger l = OverrideLedger::from_ndjson(mutated);
      if (!l.verify().ok || l.to_ndjson() != text) ++detected;
    } catch (const Error&) {
      ++detected;  // no longer parses
    }
  }
  // Every flip lands in a hashed field, a hash, or the JSON framing.
  CHECK(detected == mutations);

  std::vector<OverrideRecord> entries = ledger.entries();
  std::swap(entries[2], entries[3]);
  std::string swapped_text;
  for (const auto& e : entries) swapped_text += override_record_to_json(e).dump() + "\n";
  CHECK_FALSE(OverrideLedger::from_ndjson(swapped_text).verify().ok);

  entries = ledger.entries();
  entries.erase(entries.begin() + 4);
  std::string removed_text;
  for (const auto& e : entries) removed_text += override_record_to_json(e).dump() + "\n";
  const LedgerVerification removed = OverrideLedger::from_ndjson(removed_text).verify();
  CHECK_FALSE(removed.ok);
  CHECK(removed.first_bad_index == 4);
}

TEST_CASE("what-if: shortage toggles the penalty by +2.5", "[overrides][whatif]") {
  CaseRecord c = fixtures::case_named("case-composite");
  c.env.formulary["amoxicillin"] = dsl::FormularyStatus::available;
  dsl::EvaluationEnv delta;
  delta.formulary["amoxicillin"] = dsl::FormularyStatus::shortage;

  const WhatIfResult w = what_if_rescore(fixtures::registry(), fixtures::ontology(), c, delta);
  REQUIRE(w.deltas.size() == 1);
  CHECK(w.deltas[0].clause_id == kPenaltyClause);
  CHECK(w.deltas[0].before == Points::whole(-3));
  CHECK(w.deltas[0].after == Points::from_ticks(-5000));
  CHECK(w.deltas[0].delta == Points::from_ticks(25000));
  CHECK(w.before.earned == Points::whole(0));
  CHECK(w.after.earned == Points::from_ticks(25000));
  CHECK(c.env.formulary.at("amoxicillin") == dsl::FormularyStatus::available);
}

TEST_CASE("what-if with an empty delta is the identity", "[overrides][whatif]") {
  for (const auto& c : fixtures::cases()) {
    const WhatIfResult w = what_if_rescore(fixtures::registry(), fixtures::ontology(), c, {});
    CHECK(w.deltas.empty());
    CHECK(report_bytes(w.before) == report_bytes(w.after));
    CHECK(report_bytes(w.before) == report_bytes(score_case(fixtures::registry(), fixtures::ontology(), c)));
  }
}

TEST_CASE("what-if making applies_when false shrinks max_positive", "[overrides][whatif]") {
  const CaseRecord c = fixtures::case_named("case-composite");
  dsl::EvaluationEnv delta;
  delta.patient["age_months"] = dsl::Quantity{72, dsl::Unit::none};
  const WhatIfResult w = what_if_rescore(fixtures::registry(), fixtures::ontology(), c, delta);
  CHECK(w.before.max_positive == Points::whole(5));
  CHECK(w.after.max_positive == Points::whole(0));
  CHECK_FALSE(w.after.normalized);
  // The +3 reward and the -0.5 penalty move; the unmet reward was already 0.
  REQUIRE(w.deltas.size() == 2);
  for (const auto& d : w.deltas) {
    CHECK_FALSE(d.applicable_after);
    CHECK(d.reason_after == ApplicabilityReason::not_applicable);
  }
}

TEST_CASE("what-if jurisdiction move", "[overrides][whatif]") {
  const CaseRecord c = fixtures::case_named("case-pregnancy-ke");
  dsl::EvaluationEnv delta;
  delta.jurisdiction = "US";
  const WhatIfResult w = what_if_rescore(fixtures::registry(), fixtures::ontology(), c, delta);
  CHECK(w.after.jurisdiction == std::optional<std::string>("US"));
  CHECK(w.deltas.size() == 2);
  CHECK(w.after.normalized == std::optional<double>(1.0));
}
