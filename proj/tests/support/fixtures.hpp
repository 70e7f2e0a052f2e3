#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "guidescore/overrides.hpp"
#include "guidescore/registry.hpp"
#include "guidescore/scoring.hpp"

namespace fixtures {

std::filesystem::path data_path(const std::string& name);
std::string read(const std::string& name);

// The shared sample registry, ontology and case file under tests/data.
guidescore::Registry registry();
guidescore::OverrideOntology ontology();
std::vector<guidescore::CaseRecord> cases();
guidescore::CaseRecord case_named(const std::string& case_id);

guidescore::GuidelineClause clause(const std::string& id, guidescore::Tier tier, guidescore::Polarity polarity,
                                   const std::string& condition, const std::string& applies_when = "true",
                                   std::vector<std::string> jurisdictions = {"GLOBAL"});
guidescore::Registry registry_of(std::vector<guidescore::GuidelineClause> clauses, const std::string& label = "2025-Q3",
                                 int year = 2025);

// A case with `turns` alternating user/assistant turns.
guidescore::CaseRecord dialogue(const std::string& case_id, std::size_t turns,
                                std::optional<std::string> jurisdiction = "KE");

// Fresh, empty scratch directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace fixtures
