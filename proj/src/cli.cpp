#include "guidescore/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "guidescore/audits.hpp"
#include "guidescore/error.hpp"
#include "guidescore/lifecycle.hpp"
#include "guidescore/service.hpp"

namespace guidescore {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string registry;
  std::string ontology;
  std::string cases;
  std::string archive;
  std::string revisions;
  std::string adjudications;
  std::string targets;
  std::string out;
  std::string group_field = "demographic_group";
  std::string clause_id;
  double rate = kDefaultAuditRate;
  std::uint64_t seed = 42;
  int port = 8080;
};

fs::path sibling(const std::string& out, const std::string& suffix) {
  fs::path p(out);
  return p.parent_path() / (p.stem().string() + suffix);
}

class Runner {
 public:
  explicit Runner(CommandResult& result) : result_(result) {}

  void emit(const json& artifact, const std::string& out) {
    if (out.empty()) {
      result_.output += artifact.dump(2) + "\n";
      return;
    }
    write(out, artifact.dump(2) + "\n");
  }

  void write(const fs::path& path, std::string_view text) {
    write_text_file(path, text);
    result_.artifacts.push_back(path.string());
  }

  void say(const std::string& line) { result_.output += line + "\n"; }
  void warn(const std::string& message) { result_.diagnostics.push_back({Severity::warning, message, {}}); }
  void fail(int code) { result_.exit_code = code; }

 private:
  CommandResult& result_;
};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

Registry load_registry(const Options& o) { return parse_registry(read_text_file(o.registry)); }
OverrideOntology load_ontology_file(const Options& o) { return load_ontology(read_text_file(o.ontology)); }
std::vector<CaseRecord> load_cases(const Options& o) { return parse_cases(read_text_file(o.cases)); }

std::vector<OverrideRecord> override_ledger_for(const std::vector<CaseRecord>& cases,
                                                const std::vector<ScoreReport>& reports) {
  std::vector<OverrideRecord> out;
  for (const auto& c : cases) {
    auto it = std::find_if(reports.begin(), reports.end(), [&](const auto& r) { return r.case_id == c.case_id; });
    for (auto& rec : accepted_overrides(c, *it)) out.push_back(std::move(rec));
  }
  return out;
}

void cmd_validate(const Options& o, Runner& run) {
  const Registry r = load_registry(o);
  run.say("registry " + r.version_label() + ": " + std::to_string(r.clauses().size()) + " clauses, " +
          std::to_string(r.ledger().size()) + " ledger entries");
  if (!o.ontology.empty()) {
    const OverrideOntology ont = load_ontology_file(o);
    run.say("ontology: " + std::to_string(ont.entries().size()) + " override reasons");
  }
  if (!o.cases.empty()) run.say("cases: " + std::to_string(load_cases(o).size()) + " records");
}

void cmd_score(const Options& o, Runner& run) {
  const Registry registry = load_registry(o);
  const OverrideOntology ontology = load_ontology_file(o);
  const std::vector<CaseRecord> cases = load_cases(o);
  std::vector<ScoreReport> reports = score_run(registry, ontology, cases);

  std::map<std::string, double> weights;
  if (!o.targets.empty()) weights = coverage_report(cases, parse_targets(read_text_file(o.targets))).parity_weights;
  const RunSummary summary = aggregate_run(reports, weights);
  for (auto& r : reports) r.case_weight = case_weight_for(r.condition_tags, weights);

  json reports_json = json::array();
  for (const auto& r : reports) reports_json.push_back(report_to_json(r));
  run.emit(json{{"registry_version", registry.version_label()}, {"reports", reports_json}, {"summary", summary_to_json(summary)}},
           o.out);

  OverrideLedger ledger;
  for (auto& rec : override_ledger_for(cases, reports)) ledger.append(std::move(rec));
  if (!o.out.empty()) run.write(sibling(o.out, ".overrides.ndjson"), ledger.to_ndjson());
  if (!o.archive.empty()) {
    std::vector<ArchivedCase> archive;
    for (const auto& c : cases) {
      auto it = std::find_if(reports.begin(), reports.end(), [&](const auto& r) { return r.case_id == c.case_id; });
      archive.push_back({c, *it});
    }
    run.write(o.archive, archive_to_json(archive).dump(2) + "\n");
  }

  run.say("scored " + std::to_string(summary.case_count) + " cases (" + std::to_string(summary.scored_count) +
          " with applicable reward clauses) against registry " + registry.version_label());
  run.say("weighted mean normalized score: " +
          (summary.weighted_mean ? fixed(*summary.weighted_mean, 4) : std::string("NOT_APPLICABLE")));
  run.say("insufficiency flags: " + std::to_string(summary.insufficiency_count) +
          ", accepted overrides: " + std::to_string(ledger.size()));
}

void cmd_migrate(const Options& o, Runner& run) {
  const Registry old = load_registry(o);
  const Migration m = migrate_registry(old, parse_revisions(read_text_file(o.revisions)));
  run.emit(registry_to_json(m.registry), o.out);
  if (!o.out.empty()) {
    run.write(sibling(o.out, ".changelog.md"), m.diff.changelog_text);
    run.write(sibling(o.out, ".diff.json"), diff_to_json(m.diff).dump(2) + "\n");
  }
  run.say(m.diff.changelog_text);
}

void cmd_recalc(const Options& o, Runner& run) {
  const Registry registry = load_registry(o);
  const OverrideOntology ontology = load_ontology_file(o);
  const std::vector<ArchivedCase> archive = parse_archive(read_text_file(o.archive));
  const Recalculation r = recalculate_history(archive, registry, ontology);
  run.emit(recalculation_to_json(r), o.out);
  run.say("recalculated " + std::to_string(r.reports.size()) + " archived cases under registry " +
          registry.version_label());
  for (const auto& rr : r.reports) {
    auto show = [](const ScoreReport& s) {
      return s.earned.to_string() + "/" + s.max_positive.to_string() + " (" +
             (s.normalized ? fixed(*s.normalized, 4) : std::string("NOT_APPLICABLE")) + ")";
    };
    run.say("  " + rr.case_id + ": " + show(rr.old_score) + " -> " + show(rr.new_score));
  }
  for (const auto& e : r.errors) run.warn(e.case_id + ": " + e.message);
  if (!r.errors.empty()) run.fail(1);
}

void cmd_lint(const Options& o, Runner& run) {
  const std::vector<CaseRecord> cases = load_cases(o);
  std::optional<Registry> registry;
  if (!o.registry.empty()) registry = load_registry(o);
  const LintReport r = lint_dataset(cases, registry ? &*registry : nullptr);
  if (!o.out.empty()) run.emit(lint_to_json(r), o.out);
  run.say("multi-turn share: " + fixed(r.multi_turn_share, 4) + " (" + std::to_string(r.multi_turn) + "/" +
          std::to_string(r.total) + "), gate >= 0.50: " + (r.gate_passed ? "PASS" : "FAIL"));
  run.say("missing jurisdiction: " + std::to_string(r.missing_jurisdiction) +
          ", missing benchmark_year: " + std::to_string(r.missing_benchmark_year) +
          ", volatile untagged: " + std::to_string(r.volatile_untagged));
  for (const auto& w : r.warnings) run.warn(w);
  if (!r.gate_passed) run.fail(1);
}

void cmd_coverage(const Options& o, Runner& run) {
  const std::vector<CaseRecord> cases = load_cases(o);
  const auto targets = o.targets.empty() ? uniform_targets(priority_conditions()) : parse_targets(read_text_file(o.targets));
  const CoverageReport r = coverage_report(cases, targets);
  if (!o.out.empty()) run.emit(coverage_to_json(r), o.out);
  run.say("condition                 count    share%   target   weight");
  for (const auto& c : r.conditions) {
    char line[160];
    std::snprintf(line, sizeof line, "%-24s %6zu %9s %8s %8s", c.condition.c_str(), c.count,
                  fixed(c.share * 100.0, 2).c_str(), c.target ? fixed(*c.target, 4).c_str() : "-",
                  c.parity_weight ? fixed(*c.parity_weight, 2).c_str() : "-");
    run.say(line);
  }
  for (const auto& w : r.warnings) run.warn(w);
}

void cmd_equity(const Options& o, Runner& run) {
  const Registry registry = load_registry(o);
  const OverrideOntology ontology = load_ontology_file(o);
  const std::vector<CaseRecord> cases = load_cases(o);
  const auto reports = score_run(registry, ontology, cases);
  const EquityReport r = equity_report(override_ledger_for(cases, reports), cases, o.group_field);
  if (!o.out.empty()) run.emit(equity_to_json(r), o.out);
  run.say("group                    cases  overrides    rate  status");
  for (const auto& g : r.groups) {
    char line[160];
    std::snprintf(line, sizeof line, "%-24s %5zu %10zu %7s  %s", g.label.c_str(), g.case_count, g.override_count,
                  fixed(g.rate, 4).c_str(), g.sufficient ? "OK" : "INSUFFICIENT_DATA");
    run.say(line);
  }
  bool flagged = false;
  for (const auto& p : r.pairs) {
    run.say(p.group_a + " vs " + p.group_b + ": ratio " + (p.rate_ratio ? fixed(*p.rate_ratio, 3) : "unbounded") +
            ", z " + fixed(p.z, 3) + (p.flagged ? "  FLAGGED" : ""));
    flagged = flagged || p.flagged;
  }
  run.say("(no multiple-comparison correction applied)");
  if (flagged) run.fail(1);
}

void cmd_audit_sample(const Options& o, Runner& run) {
  const Registry registry = load_registry(o);
  const OverrideOntology ontology = load_ontology_file(o);
  const auto reports = score_run(registry, ontology, load_cases(o));
  const AuditSampleResult r = sample_for_audit(reports, o.rate, o.seed);
  run.emit(audit_sample_result_to_json(r), o.out);
  run.say("sampled " + std::to_string(r.items.size()) + " of " + std::to_string(r.population) +
          " clause outcomes (rate " + fixed(o.rate, 4) + ", seed " + std::to_string(o.seed) + ")");
  for (const auto& w : r.warnings) run.warn(w);
}

void cmd_audit_agreement(const Options& o, Runner& run) {
  std::vector<AdjudicationRecord> records;
  for (const auto& j : parse_ndjson(read_text_file(o.adjudications))) records.push_back(adjudication_from_json(j));
  const AgreementStats s = agreement_stats(records);
  if (!o.out.empty()) run.emit(agreement_to_json(s), o.out);
  const auto& c = s.table.counts;
  run.say("adjudications: " + std::to_string(s.total));
  run.say("                 human met  human unmet");
  char line[128];
  std::snprintf(line, sizeof line, "machine met      %9zu  %11zu", c[1][1], c[1][0]);
  run.say(line);
  std::snprintf(line, sizeof line, "machine unmet    %9zu  %11zu", c[0][1], c[0][0]);
  run.say(line);
  run.say("raw agreement: " + fixed(s.raw_agreement, 4) + ", expected: " + fixed(s.expected_agreement, 4) +
          ", Cohen's kappa: " + fixed(s.kappa, 4));
}

void cmd_trace(const Options& o, Runner& run) {
  const TraceRecord t = trace_clause(load_registry(o), o.clause_id);
  run.emit(trace_to_json(t), o.out);
  if (!o.out.empty()) run.say(t.clause_id + " (" + t.registry_version + ")");
}

void cmd_serve(const Options& o, Runner& run) {
  ServiceConfig cfg;
  cfg.registry_path = o.registry;
  cfg.ontology_path = o.ontology;
  cfg.cases_path = o.cases;
  if (!o.targets.empty()) cfg.targets_path = o.targets;
  if (!o.out.empty()) cfg.state_dir = o.out;
  cfg.audit_rate = o.rate;
  cfg.seed = o.seed;
  cfg.group_field = o.group_field;
  cfg.port = o.port;
  auto service = AuditService::load(cfg);
  HttpServer server(*service);
  const int port = server.bind(cfg.host, cfg.port);
  std::cerr << "serving on http://" << cfg.host << ":" << port << "/api/v1/\n";
  server.run();
  run.say("server stopped");
}

}  // namespace

CommandResult execute(const std::vector<std::string>& args) {
  CommandResult result;
  Runner run(result);
  Options o;

  CLI::App app{"Guideline-anchored reward engine", "guidescore"};
  app.require_subcommand(1);

  auto registry_opt = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--registry", o.registry, "Registry JSON document");
    if (required) opt->required();
  };

  auto* validate = app.add_subcommand("validate", "Validate registry, ontology and case files");
  registry_opt(validate, true);
  validate->add_option("--ontology", o.ontology, "Override ontology JSON");
  validate->add_option("--cases", o.cases, "Case file JSON");

  auto* score = app.add_subcommand("score", "Score cases against the registry");
  registry_opt(score, true);
  score->add_option("--ontology", o.ontology)->required();
  score->add_option("--cases", o.cases)->required();
  score->add_option("--targets", o.targets, "Coverage targets; parity weights feed the run summary");
  score->add_option("--archive", o.archive, "Also write an archive of (case, report) pairs");
  score->add_option("--out", o.out, "Report JSON path");

  auto* migrate = app.add_subcommand("migrate", "Apply a revision document to a registry");
  registry_opt(migrate, true);
  migrate->add_option("--revisions", o.revisions)->required();
  migrate->add_option("--out", o.out, "New registry JSON path");

  auto* recalc = app.add_subcommand("recalc", "Rescore archived cases under a registry");
  registry_opt(recalc, true);
  recalc->add_option("--ontology", o.ontology)->required();
  recalc->add_option("--archive", o.archive)->required();
  recalc->add_option("--out", o.out);

  auto* lint = app.add_subcommand("lint", "Dataset lint checks (multi-turn gate, missing fields)");
  lint->add_option("--cases", o.cases)->required();
  registry_opt(lint, false);
  lint->add_option("--out", o.out);

  auto* coverage = app.add_subcommand("coverage", "Per-condition coverage and parity weights");
  coverage->add_option("--cases", o.cases)->required();
  coverage->add_option("--targets", o.targets, "JSON object condition->share, or array of conditions");
  coverage->add_option("--out", o.out);

  auto* equity = app.add_subcommand("equity", "Override-rate disparity across groups");
  registry_opt(equity, true);
  equity->add_option("--ontology", o.ontology)->required();
  equity->add_option("--cases", o.cases)->required();
  equity->add_option("--group-field", o.group_field);
  equity->add_option("--out", o.out);

  auto* audit = app.add_subcommand("audit", "Human audit sampling and agreement");
  audit->require_subcommand(1);
  auto* sample = audit->add_subcommand("sample", "Draw the audit sample");
  registry_opt(sample, true);
  sample->add_option("--ontology", o.ontology)->required();
  sample->add_option("--cases", o.cases)->required();
  sample->add_option("--rate", o.rate)->check(CLI::Range(0.0, 1.0));
  sample->add_option("--seed", o.seed);
  sample->add_option("--out", o.out);
  auto* agreement = audit->add_subcommand("agreement", "Grader-human agreement statistics");
  agreement->add_option("--adjudications", o.adjudications, "Adjudications NDJSON")->required();
  agreement->add_option("--out", o.out);

  auto* trace = app.add_subcommand("trace", "Guideline -> checklist -> clause trace");
  registry_opt(trace, true);
  trace->add_option("clause_id", o.clause_id)->required();
  trace->add_option("--out", o.out);

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  registry_opt(serve, true);
  serve->add_option("--ontology", o.ontology)->required();
  serve->add_option("--cases", o.cases)->required();
  serve->add_option("--targets", o.targets);
  serve->add_option("--rate", o.rate)->check(CLI::Range(0.0, 1.0));
  serve->add_option("--seed", o.seed);
  serve->add_option("--group-field", o.group_field);
  serve->add_option("--port", o.port);
  serve->add_option("--out", o.out, "State directory for adjudication and misgrade logs");

  if (!args.empty() && !args.front().starts_with("-")) {
    const auto subs = app.get_subcommands([](CLI::App*) { return true; });
    const bool known = std::any_of(subs.begin(), subs.end(), [&](CLI::App* s) { return s->get_name() == args.front(); });
    if (!known) {
      result.exit_code = 2;
      result.diagnostics.push_back({Severity::error, "unknown command '" + args.front() + "'", "argv"});
      result.output = app.help();
      return result;
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    result.output = app.help();
    return result;
  } catch (const CLI::CallForAllHelp&) {
    result.output = app.help("", CLI::AppFormatMode::All);
    return result;
  } catch (const CLI::ParseError& e) {
    result.exit_code = 2;
    result.diagnostics.push_back({Severity::error, e.what(), "argv"});
    result.output = app.help();
    return result;
  }

  try {
    if (*validate) cmd_validate(o, run);
    else if (*score) cmd_score(o, run);
    else if (*migrate) cmd_migrate(o, run);
    else if (*recalc) cmd_recalc(o, run);
    else if (*lint) cmd_lint(o, run);
    else if (*coverage) cmd_coverage(o, run);
    else if (*equity) cmd_equity(o, run);
    else if (*sample) cmd_audit_sample(o, run);
    else if (*agreement) cmd_audit_agreement(o, run);
    else if (*trace) cmd_trace(o, run);
    else if (*serve) cmd_serve(o, run);
  } catch (const Error& e) {
    result.exit_code = 2;
    std::string location;
    if (e.offset()) location = "offset " + std::to_string(*e.offset());
    result.diagnostics.push_back({Severity::error, e.what(), location});
  } catch (const std::exception& e) {
    result.exit_code = 2;
    result.diagnostics.push_back({Severity::error, e.what(), {}});
  }
  return result;
}

std::string render_diagnostics(const CommandResult& result) {
  std::string out;
  for (const auto& d : result.diagnostics) {
    switch (d.severity) {
      case Severity::info: out += "info: "; break;
      case Severity::warning: out += "warning: "; break;
      case Severity::error: out += "error: "; break;
    }
    out += d.message;
    if (!d.location.empty()) out += " [" + d.location + "]";
    out += "\n";
  }
  return out;
}

}  // namespace guidescore
