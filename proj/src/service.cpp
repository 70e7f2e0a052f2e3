#include "guidescore/service.hpp"

#include <httplib.h>

#include <chrono>
#include <ctime>
#include <mutex>

#include "guidescore/error.hpp"
#include "guidescore/whatif.hpp"

namespace guidescore {

namespace {

ApiResponse error_response(int status, std::string_view code, const std::string& message) {
  return ApiResponse{status, json{{"error", std::string(code)}, {"message", message}}};
}

ApiResponse error_response(int status, const Error& e) {
  return error_response(status, error_code_name(e.code()), e.detail());
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json turns_to_json(const std::vector<Turn>& turns) {
  json out = json::array();
  for (const auto& t : turns) out.push_back({{"role", t.role == Role::user ? "user" : "assistant"}, {"text", t.text}});
  return out;
}

}  // namespace

AuditService::AuditService(Registry registry, OverrideOntology ontology, std::vector<CaseRecord> cases,
                           const ServiceConfig& config)
    : registry_(std::move(registry)),
      ontology_(std::move(ontology)),
      cases_(std::move(cases)),
      group_field_(config.group_field) {
  reports_ = score_run(registry_, ontology_, cases_);
  for (const auto& c : cases_) {
    auto it = std::find_if(reports_.begin(), reports_.end(), [&](const auto& r) { return r.case_id == c.case_id; });
    for (auto& rec : accepted_overrides(c, *it)) override_ledger_.push_back(std::move(rec));
  }
  sample_ = sample_for_audit(reports_, config.audit_rate, config.seed);
  targets_ = config.targets_path ? parse_targets(read_text_file(*config.targets_path))
                                 : uniform_targets(priority_conditions());

  if (config.state_dir) {
    std::filesystem::create_directories(*config.state_dir);
    const auto adj_path = *config.state_dir / "adjudications.ndjson";
    const auto mg_path = *config.state_dir / "misgrades.ndjson";
    if (std::filesystem::exists(adj_path)) {
      for (const auto& j : parse_ndjson(read_text_file(adj_path))) adjudications_.push_back(adjudication_from_json(j));
    }
    if (std::filesystem::exists(mg_path)) misgrades_ = MisgradeTracker::from_ndjson(read_text_file(mg_path));
    adjudication_log_ = std::make_unique<NdjsonAppender>(adj_path);
    misgrade_log_ = std::make_unique<NdjsonAppender>(mg_path);
  }
}

std::unique_ptr<AuditService> AuditService::load(const ServiceConfig& config) {
  Registry registry = parse_registry(read_text_file(config.registry_path));
  OverrideOntology ontology = load_ontology(read_text_file(config.ontology_path));
  std::vector<CaseRecord> cases = parse_cases(read_text_file(config.cases_path));
  return std::make_unique<AuditService>(std::move(registry), std::move(ontology), std::move(cases), config);
}

const CaseRecord* AuditService::find_case(const std::string& id) const {
  for (const auto& c : cases_) {
    if (c.case_id == id) return &c;
  }
  return nullptr;
}

ApiResponse AuditService::audit_queue(std::optional<std::size_t> limit) const {
  std::shared_lock lock(mu_);
  json items = json::array();
  std::size_t pending = 0;
  for (const auto& s : sample_.items) {
    const bool done = std::any_of(adjudications_.begin(), adjudications_.end(),
                                  [&](const auto& a) { return a.sample_id == s.sample_id; });
    if (!done) ++pending;
    if (limit && items.size() >= *limit) continue;
    json item = audit_sample_to_json(s);
    const CaseRecord* c = find_case(s.case_id);
    const GuidelineClause* clause = registry_.find(s.clause_id);
    item["turns"] = c ? turns_to_json(c->turns) : json::array();
    item["checklist_text"] = clause ? clause->checklist_text : "";
    item["trace_quote"] = clause ? clause->trace_quote : "";
    item["trace_link"] = "/api/v1/clauses/" + s.clause_id + "/trace";
    item["adjudication_state"] = done ? "adjudicated" : "pending";
    items.push_back(std::move(item));
  }
  return ApiResponse{200, json{{"sample_size", sample_.items.size()},
                               {"population", sample_.population},
                               {"pending", pending},
                               {"warnings", sample_.warnings},
                               {"items", items}}};
}

ApiResponse AuditService::post_adjudication(const std::string& body) {
  json req;
  try {
    req = parse_json_document(body);
  } catch (const Error& e) {
    return error_response(400, e);
  }
  if (!req.is_object() || !req.contains("sample_id") || !req["sample_id"].is_string() ||
      !req.contains("human_verdict") || !req["human_verdict"].is_boolean()) {
    return error_response(400, "E_SYNTAX", "body must carry sample_id (string) and human_verdict (boolean)");
  }
  const std::string sample_id = req["sample_id"].get<std::string>();
  auto it = std::find_if(sample_.items.begin(), sample_.items.end(),
                         [&](const auto& s) { return s.sample_id == sample_id; });
  if (it == sample_.items.end()) return error_response(404, "E_NOT_FOUND", "no sampled item '" + sample_id + "'");

  AdjudicationRecord a;
  a.sample_id = sample_id;
  a.case_id = it->case_id;
  a.clause_id = it->clause_id;
  a.machine_verdict = it->machine_verdict;
  a.human_verdict = req["human_verdict"].get<bool>();
  a.note = req.value("note", std::string{});
  a.timestamp = req.value("timestamp", utc_now());

  std::unique_lock lock(mu_);
  if (std::any_of(adjudications_.begin(), adjudications_.end(), [&](const auto& x) { return x.sample_id == sample_id; })) {
    return error_response(409, "E_DUPLICATE", "sample '" + sample_id + "' is already adjudicated");
  }
  try {
    if (adjudication_log_) adjudication_log_->append(adjudication_to_json(a));
    adjudications_.push_back(a);
    std::optional<MisgradeEntry> entry = record_misgrade(misgrades_, a);
    if (entry && misgrade_log_) misgrade_log_->append(misgrade_to_json(*entry));
    return ApiResponse{201, json{{"adjudication", adjudication_to_json(a)},
                                 {"misgrade", entry ? misgrade_to_json(*entry) : json(nullptr)}}};
  } catch (const Error& e) {
    return error_response(500, e);
  }
}

ApiResponse AuditService::agreement() const {
  std::shared_lock lock(mu_);
  if (adjudications_.empty()) {
    return ApiResponse{200, json{{"total", 0}, {"raw_agreement", nullptr}, {"kappa", nullptr}}};
  }
  return ApiResponse{200, agreement_to_json(agreement_stats(adjudications_))};
}

ApiResponse AuditService::whatif(const std::string& body) const {
  try {
    const json req = parse_json_document(body);
    if (!req.is_object()) return error_response(400, "E_SYNTAX", "body must be a JSON object");
    const std::string case_id = detail::require_string(req, "case_id", "whatif");
    const CaseRecord* c = find_case(case_id);
    if (!c) return error_response(404, "E_NOT_FOUND", "no case '" + case_id + "'");
    const dsl::EvaluationEnv delta = env_from_json(req.value("env_delta", json::object()));
    return ApiResponse{200, whatif_to_json(what_if_rescore(registry_, ontology_, *c, delta))};
  } catch (const Error& e) {
    const bool input = e.code() == ErrorCode::syntax || e.code() == ErrorCode::unit;
    return error_response(input ? 400 : 422, e);
  }
}

ApiResponse AuditService::clause_trace(const std::string& clause_id) const {
  try {
    return ApiResponse{200, trace_to_json(trace_clause(registry_, clause_id))};
  } catch (const Error& e) {
    return error_response(404, e);
  }
}

ApiResponse AuditService::report(const std::string& case_id) const {
  for (const auto& r : reports_) {
    if (r.case_id == case_id) return ApiResponse{200, report_to_json(r)};
  }
  return error_response(404, "E_NOT_FOUND", "no report for case '" + case_id + "'");
}

ApiResponse AuditService::coverage() const {
  try {
    return ApiResponse{200, coverage_to_json(coverage_report(cases_, targets_))};
  } catch (const Error& e) {
    return error_response(422, e);
  }
}

ApiResponse AuditService::equity(const std::optional<std::string>& group_field) const {
  try {
    return ApiResponse{200, equity_to_json(equity_report(override_ledger_, cases_, group_field.value_or(group_field_)))};
  } catch (const Error& e) {
    return error_response(422, e);
  }
}

// ---------------------------------------------------------------------------

namespace {

void send(httplib::Response& res, const ApiResponse& api) {
  res.status = api.status;
  res.set_content(api.body.dump(), "application/json");
}

}  // namespace

HttpServer::HttpServer(AuditService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto& s = *server_;
  // The library default adds SO_REUSEPORT, which would let a second server
  // share a busy port silently.
  s.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  s.Get("/api/v1/audit/queue", [this](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::size_t> limit;
    if (req.has_param("limit")) {
      try {
        limit = static_cast<std::size_t>(std::stoul(req.get_param_value("limit")));
      } catch (const std::exception&) {
        send(res, error_response(400, "E_SYNTAX", "limit must be a non-negative integer"));
        return;
      }
    }
    send(res, service_.audit_queue(limit));
  });
  s.Post("/api/v1/audit/adjudications", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.post_adjudication(req.body));
  });
  s.Get("/api/v1/stats/agreement",
        [this](const httplib::Request&, httplib::Response& res) { send(res, service_.agreement()); });
  s.Post("/api/v1/whatif",
         [this](const httplib::Request& req, httplib::Response& res) { send(res, service_.whatif(req.body)); });
  s.Get(R"(/api/v1/clauses/([^/]+)/trace)", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.clause_trace(req.matches[1]));
  });
  s.Get(R"(/api/v1/reports/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.report(req.matches[1]));
  });
  s.Get("/api/v1/coverage", [this](const httplib::Request&, httplib::Response& res) { send(res, service_.coverage()); });
  s.Get("/api/v1/equity", [this](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> field;
    if (req.has_param("group_field")) field = req.get_param_value("group_field");
    send(res, service_.equity(field));
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = -1;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (server_->bind_to_port(host, port)) {
    bound = port;
  }
  if (bound <= 0) throw Error(ErrorCode::port_in_use, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::run() { server_->listen_after_bind(); }

void HttpServer::start() {
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void HttpServer::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace guidescore
