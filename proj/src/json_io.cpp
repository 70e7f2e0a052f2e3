#include "guidescore/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "guidescore/error.hpp"

namespace guidescore {

namespace detail {

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::syntax, where + ": expected a JSON object");
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::syntax, where + ": missing field '" + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) throw Error(ErrorCode::syntax, where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

std::string optional_string(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) throw Error(ErrorCode::syntax, where + ": field '" + key + "' must be a string");
  return it->get<std::string>();
}

std::vector<std::string> string_list(const json& obj, const char* key, const std::string& where) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) throw Error(ErrorCode::syntax, where + ": field '" + key + "' must be an array of strings");
  for (const auto& e : *it) {
    if (!e.is_string()) throw Error(ErrorCode::syntax, where + ": field '" + key + "' must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace detail

using namespace detail;

json parse_json_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    throw Error(ErrorCode::syntax, e.what(), offset);
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

std::vector<json> parse_ndjson(std::string_view text) {
  std::vector<json> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      try {
        out.push_back(json::parse(line.begin(), line.end()));
      } catch (const json::parse_error& e) {
        throw Error(ErrorCode::syntax, std::string("line ") + std::to_string(out.size() + 1) + ": " + e.what(),
                    start + (e.byte > 0 ? e.byte - 1 : 0));
      }
    }
    start = end + 1;
  }
  return out;
}

std::optional<Date> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (text[i] < '0' || text[i] > '9') return std::nullopt;
      v = v * 10 + (text[i] - '0');
    }
    return v;
  };
  auto y = num(0, 4), m = num(5, 2), d = num(8, 2);
  if (!y || !m || !d) return std::nullopt;
  Date date{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
            std::chrono::day{static_cast<unsigned>(*d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

dsl::Value value_from_json(const json& j, const std::string& where) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number()) return dsl::Quantity{j.get<double>(), dsl::Unit::none};
  if (j.is_string()) return j.get<std::string>();
  if (j.is_object() && j.contains("value") && j["value"].is_number()) {
    dsl::Quantity q{j["value"].get<double>(), dsl::Unit::none};
    if (j.contains("unit")) {
      if (!j["unit"].is_string()) throw Error(ErrorCode::syntax, where + ": unit must be a string");
      auto u = dsl::unit_from_name(j["unit"].get<std::string>());
      if (!u) throw Error(ErrorCode::unit, where + ": unknown unit '" + j["unit"].get<std::string>() + "'");
      q.unit = *u;
    }
    return q;
  }
  throw Error(ErrorCode::syntax, where + ": unsupported value " + j.dump());
}

json value_to_json(const dsl::Value& v) {
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  if (const auto* q = std::get_if<dsl::Quantity>(&v)) {
    if (q->unit == dsl::Unit::none) return q->value;
    return json{{"value", q->value}, {"unit", std::string(dsl::unit_name(q->unit))}};
  }
  return std::get<std::string>(v);
}

namespace {

bool is_quantity_object(const json& j) {
  if (!j.is_object() || !j.contains("value") || !j["value"].is_number()) return false;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "value" && it.key() != "unit") return false;
  }
  return true;
}

void flatten_into(const json& j, const std::string& prefix, std::map<std::string, dsl::Value>& out,
                  const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::syntax, where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!dsl::is_identifier(key)) throw Error(ErrorCode::syntax, where + ": invalid key '" + key + "'");
    if (it->is_object() && !is_quantity_object(*it)) {
      flatten_into(*it, key, out, where);
    } else {
      out.insert_or_assign(key, value_from_json(*it, where + "." + key));
    }
  }
}

json map_to_json(const std::map<std::string, dsl::Value>& m) {
  json out = json::object();
  for (const auto& [k, v] : m) out[k] = value_to_json(v);
  return out;
}

}  // namespace

dsl::EvaluationEnv env_from_json(const json& j) {
  dsl::EvaluationEnv env;
  if (j.is_null()) return env;
  if (!j.is_object()) throw Error(ErrorCode::syntax, "env: expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& section = it.key();
    if (section == "assertions") flatten_into(*it, "", env.assertions, "env.assertions");
    else if (section == "patient") flatten_into(*it, "", env.patient, "env.patient");
    else if (section == "context") flatten_into(*it, "", env.context, "env.context");
    else if (section == "formulary") {
      if (!it->is_object()) throw Error(ErrorCode::syntax, "env.formulary: expected an object");
      for (auto f = it->begin(); f != it->end(); ++f) {
        if (!dsl::is_identifier(f.key())) throw Error(ErrorCode::syntax, "env.formulary: invalid key '" + f.key() + "'");
        auto status = f->is_string() ? dsl::formulary_status_from_name(f->get<std::string>()) : std::nullopt;
        if (!status) {
          throw Error(ErrorCode::syntax, "env.formulary." + f.key() + ": expected available|shortage|unavailable");
        }
        env.formulary.emplace(f.key(), *status);
      }
    } else if (section == "jurisdiction") {
      if (!it->is_string()) throw Error(ErrorCode::syntax, "env.jurisdiction must be a string");
      env.jurisdiction = it->get<std::string>();
    } else {
      throw Error(ErrorCode::syntax, "env: unknown section '" + section + "'");
    }
  }
  return env;
}

json env_to_json(const dsl::EvaluationEnv& env) {
  json out = json::object();
  out["assertions"] = map_to_json(env.assertions);
  out["patient"] = map_to_json(env.patient);
  out["context"] = map_to_json(env.context);
  json formulary = json::object();
  for (const auto& [k, v] : env.formulary) formulary[k] = std::string(dsl::formulary_status_name(v));
  out["formulary"] = formulary;
  if (!env.jurisdiction.empty()) out["jurisdiction"] = env.jurisdiction;
  return out;
}

json override_record_to_json(const OverrideRecord& r) {
  return json{{"reason_code", r.reason_code}, {"clause_id", r.clause_id}, {"justification", r.justification},
              {"timestamp", r.timestamp},     {"case_id", r.case_id},     {"prev_hash", r.prev_hash},
              {"hash", r.hash}};
}

OverrideRecord override_record_from_json(const json& j) {
  const std::string where = "override record";
  OverrideRecord r;
  r.reason_code = require_string(j, "reason_code", where);
  r.clause_id = require_string(j, "clause_id", where);
  r.justification = optional_string(j, "justification", where);
  r.timestamp = optional_string(j, "timestamp", where);
  r.case_id = optional_string(j, "case_id", where);
  r.prev_hash = optional_string(j, "prev_hash", where);
  r.hash = optional_string(j, "hash", where);
  return r;
}

CaseRecord case_from_json(const json& j) {
  CaseRecord c;
  c.case_id = require_string(j, "case_id", "case");
  const std::string where = "case " + c.case_id;
  if (c.case_id.empty()) throw Error(ErrorCode::invalid, "case: case_id must be nonempty");

  if (auto it = j.find("benchmark_year"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw Error(ErrorCode::syntax, where + ": benchmark_year must be an integer");
    c.benchmark_year = it->get<int>();
  }
  if (auto s = optional_string(j, "jurisdiction", where); !s.empty()) c.jurisdiction = s;
  if (auto s = optional_string(j, "evaluation_date", where); !s.empty()) {
    c.evaluation_date = parse_date(s);
    if (!c.evaluation_date) throw Error(ErrorCode::syntax, where + ": evaluation_date must be YYYY-MM-DD");
  }
  for (auto& t : string_list(j, "condition_tags", where)) c.condition_tags.insert(std::move(t));
  if (auto s = optional_string(j, "demographic_group", where); !s.empty()) c.demographic_group = s;

  const json& turns = require(j, "turns", where);
  if (!turns.is_array() || turns.empty()) throw Error(ErrorCode::invalid, where + ": turns must be a nonempty array");
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const std::string tw = where + " turn " + std::to_string(i);
    const std::string role = require_string(turns[i], "role", tw);
    Turn t;
    if (role == "user") t.role = Role::user;
    else if (role == "assistant") t.role = Role::assistant;
    else throw Error(ErrorCode::invalid, tw + ": role must be user or assistant");
    const Role expected = i % 2 == 0 ? Role::user : Role::assistant;
    if (t.role != expected) throw Error(ErrorCode::invalid, tw + ": roles must alternate starting with user");
    t.text = turns[i].contains("text") ? require_string(turns[i], "text", tw) : require_string(turns[i], "content", tw);
    c.turns.push_back(std::move(t));
  }

  if (auto it = j.find("env"); it != j.end()) c.env = env_from_json(*it);

  if (auto it = j.find("grader_verdicts"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw Error(ErrorCode::syntax, where + ": grader_verdicts must be an object");
    for (auto v = it->begin(); v != it->end(); ++v) {
      if (!v->is_array()) throw Error(ErrorCode::syntax, where + ": grader_verdicts." + v.key() + " must be an array");
      std::vector<bool> verdicts;
      for (const auto& b : *v) {
        if (!b.is_boolean()) {
          throw Error(ErrorCode::syntax, where + ": grader_verdicts." + v.key() + " must contain booleans");
        }
        verdicts.push_back(b.get<bool>());
      }
      c.grader_verdicts.emplace(v.key(), std::move(verdicts));
    }
  }

  if (auto it = j.find("override_requests"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw Error(ErrorCode::syntax, where + ": override_requests must be an array");
    for (const auto& r : *it) {
      OverrideRecord rec = override_record_from_json(r);
      if (rec.case_id.empty()) rec.case_id = c.case_id;
      c.override_requests.push_back(std::move(rec));
    }
  }
  return c;
}

json case_to_json(const CaseRecord& c) {
  json out;
  out["case_id"] = c.case_id;
  out["benchmark_year"] = c.benchmark_year ? json(*c.benchmark_year) : json(nullptr);
  out["jurisdiction"] = c.jurisdiction ? json(*c.jurisdiction) : json(nullptr);
  if (c.evaluation_date) out["evaluation_date"] = format_date(*c.evaluation_date);
  out["condition_tags"] = c.condition_tags;
  out["demographic_group"] = c.demographic_group ? json(*c.demographic_group) : json(nullptr);
  json turns = json::array();
  for (const auto& t : c.turns) {
    turns.push_back({{"role", t.role == Role::user ? "user" : "assistant"}, {"text", t.text}});
  }
  out["turns"] = turns;
  out["env"] = env_to_json(c.env);
  json verdicts = json::object();
  for (const auto& [k, v] : c.grader_verdicts) verdicts[k] = v;
  out["grader_verdicts"] = verdicts;
  json requests = json::array();
  for (const auto& r : c.override_requests) {
    requests.push_back({{"reason_code", r.reason_code},
                        {"clause_id", r.clause_id},
                        {"justification", r.justification},
                        {"timestamp", r.timestamp}});
  }
  out["override_requests"] = requests;
  return out;
}

std::vector<CaseRecord> parse_cases(std::string_view document_text) {
  const json doc = parse_json_document(document_text);
  if (!doc.is_array()) throw Error(ErrorCode::syntax, "case file must be a JSON array");
  std::vector<CaseRecord> cases;
  std::set<std::string> seen;
  for (const auto& j : doc) {
    CaseRecord c = case_from_json(j);
    if (!seen.insert(c.case_id).second) throw Error(ErrorCode::dup_id, "duplicate case_id '" + c.case_id + "'");
    cases.push_back(std::move(c));
  }
  return cases;
}

dsl::EvaluationEnv effective_env(const CaseRecord& c) {
  dsl::EvaluationEnv env = c.env;
  if (env.jurisdiction.empty() && c.jurisdiction) env.jurisdiction = *c.jurisdiction;
  return env;
}

NdjsonAppender::NdjsonAppender(std::filesystem::path path) : path_(std::move(path)) {}

void NdjsonAppender::append(const json& record) {
  std::lock_guard lock(mu_);
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::io, "cannot append to " + path_.string());
  out << record.dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::io, "append failed for " + path_.string());
}

}  // namespace guidescore
