#include "support/fixtures.hpp"

#include <stdexcept>

#include "guidescore/json_io.hpp"

namespace fixtures {

using namespace guidescore;

std::filesystem::path data_path(const std::string& name) { return std::filesystem::path(GUIDESCORE_TEST_DATA) / name; }

std::string read(const std::string& name) { return read_text_file(data_path(name)); }

Registry registry() { return parse_registry(read("registry.json")); }

OverrideOntology ontology() { return load_ontology(read("ontology.json")); }

std::vector<CaseRecord> cases() { return parse_cases(read("cases.json")); }

CaseRecord case_named(const std::string& case_id) {
  for (auto& c : cases()) {
    if (c.case_id == case_id) return c;
  }
  throw std::runtime_error("no fixture case " + case_id);
}

GuidelineClause clause(const std::string& id, Tier tier, Polarity polarity, const std::string& condition,
                       const std::string& applies_when, std::vector<std::string> jurisdictions) {
  GuidelineClause c;
  c.id = id;
  c.guideline_title = "Synthetic guideline";
  c.guideline_version = "1";
  c.recommendation_path = id.substr(id.rfind("-Rec-") + 5);
  c.tier = tier;
  c.polarity = polarity;
  c.jurisdictions = std::move(jurisdictions);
  c.effective_start = std::chrono::year{2020} / 1 / 1;
  c.applies_when_text = applies_when;
  c.condition_text = condition;
  c.checklist_text = "Checklist item for " + id;
  c.trace_quote = "Quoted recommendation for " + id;
  return c;
}

Registry registry_of(std::vector<GuidelineClause> clauses, const std::string& label, int year) {
  return Registry::build(label, year, std::move(clauses));
}

CaseRecord dialogue(const std::string& case_id, std::size_t turns, std::optional<std::string> jurisdiction) {
  CaseRecord c;
  c.case_id = case_id;
  c.benchmark_year = 2025;
  c.jurisdiction = std::move(jurisdiction);
  for (std::size_t i = 0; i < turns; ++i) {
    c.turns.push_back({i % 2 == 0 ? Role::user : Role::assistant, "turn " + std::to_string(i)});
  }
  return c;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("guidescore-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
