#pragma once

#include <filesystem>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "guidescore/dsl.hpp"
#include "guidescore/records.hpp"

namespace guidescore {

using json = nlohmann::json;

// Throws Error{syntax} carrying the byte offset of the first bad character.
json parse_json_document(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// Newline-delimited JSON: one object per non-blank line.
std::vector<json> parse_ndjson(std::string_view text);

std::optional<Date> parse_date(std::string_view text);
std::string format_date(const Date& d);

dsl::Value value_from_json(const json& j, const std::string& where);
json value_to_json(const dsl::Value& v);

// Maps may be flat dotted keys or nested objects; nested objects are
// flattened. {"value": n, "unit": "days"} is a quantity, not a nesting level.
dsl::EvaluationEnv env_from_json(const json& j);
json env_to_json(const dsl::EvaluationEnv& env);

CaseRecord case_from_json(const json& j);
json case_to_json(const CaseRecord& c);
// Checks case_id uniqueness across the run.
std::vector<CaseRecord> parse_cases(std::string_view document_text);

json override_record_to_json(const OverrideRecord& r);
OverrideRecord override_record_from_json(const json& j);

// Single-writer append of JSON lines to a file. Concurrent callers are
// serialised; every line is flushed before append() returns.
class NdjsonAppender {
 public:
  explicit NdjsonAppender(std::filesystem::path path);
  void append(const json& record);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mu_;
};

namespace detail {

const json& require(const json& obj, const char* key, const std::string& where);
std::string require_string(const json& obj, const char* key, const std::string& where);
std::string optional_string(const json& obj, const char* key, const std::string& where);
std::vector<std::string> string_list(const json& obj, const char* key, const std::string& where);

}  // namespace detail

}  // namespace guidescore
