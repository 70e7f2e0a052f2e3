#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "guidescore/audits.hpp"
#include "guidescore/overrides.hpp"
#include "guidescore/registry.hpp"
#include "guidescore/scoring.hpp"

namespace httplib {
class Server;
}

namespace guidescore {

struct ServiceConfig {
  std::filesystem::path registry_path;
  std::filesystem::path ontology_path;
  std::filesystem::path cases_path;
  std::optional<std::filesystem::path> targets_path;
  // Holds adjudications.ndjson and misgrades.ndjson; in-memory only when unset.
  std::optional<std::filesystem::path> state_dir;
  double audit_rate = kDefaultAuditRate;
  std::uint64_t seed = 42;
  std::string group_field = "demographic_group";
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
};

struct ApiResponse {
  int status = 200;
  json body;
};

// Engine state behind the HTTP API. Registry, ontology, cases, reports and
// the audit sample are immutable after load; adjudications and misgrades are
// appended under a single writer lock.
class AuditService {
 public:
  AuditService(Registry registry, OverrideOntology ontology, std::vector<CaseRecord> cases,
               const ServiceConfig& config);
  // Reads and scores every artifact; throws the first load error.
  static std::unique_ptr<AuditService> load(const ServiceConfig& config);

  ApiResponse audit_queue(std::optional<std::size_t> limit) const;
  ApiResponse post_adjudication(const std::string& body);
  ApiResponse agreement() const;
  ApiResponse whatif(const std::string& body) const;
  ApiResponse clause_trace(const std::string& clause_id) const;
  ApiResponse report(const std::string& case_id) const;
  ApiResponse coverage() const;
  ApiResponse equity(const std::optional<std::string>& group_field) const;

  const std::vector<AdjudicationRecord>& adjudications() const { return adjudications_; }
  const MisgradeTracker& misgrades() const { return misgrades_; }

 private:
  const CaseRecord* find_case(const std::string& id) const;

  Registry registry_;
  OverrideOntology ontology_;
  std::vector<CaseRecord> cases_;
  std::vector<ScoreReport> reports_;
  std::vector<OverrideRecord> override_ledger_;
  AuditSampleResult sample_;
  std::map<std::string, double> targets_;
  std::string group_field_;

  mutable std::shared_mutex mu_;
  std::vector<AdjudicationRecord> adjudications_;
  MisgradeTracker misgrades_;
  std::unique_ptr<NdjsonAppender> adjudication_log_;
  std::unique_ptr<NdjsonAppender> misgrade_log_;
};

// HTTP/1.1 front end for an AuditService.
class HttpServer {
 public:
  explicit HttpServer(AuditService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns the bound port. Throws Error{port_in_use}.
  int bind(const std::string& host, int port);
  void run();    // blocks until stop()
  void start();  // runs on a background thread
  void stop();

 private:
  AuditService& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace guidescore
