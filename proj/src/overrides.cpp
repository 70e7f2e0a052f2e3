#include "guidescore/overrides.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <memory>
#include <set>

#include "guidescore/error.hpp"

namespace guidescore {

using namespace detail;

OverrideOntology::OverrideOntology(std::vector<OverrideEntry> entries) {
  std::set<std::string> seen;
  for (auto& e : entries) {
    if (e.reason_code.empty()) throw Error(ErrorCode::invalid, "override reason_code must be nonempty");
    if (!seen.insert(e.reason_code).second) {
      throw Error(ErrorCode::dup_reason, "duplicate override reason '" + e.reason_code + "'");
    }
    if (e.adjusted_penalty.sign() > 0 || e.adjusted_penalty.abs() > kMaxPenaltyMagnitude) {
      throw Error(ErrorCode::bad_penalty, "reason " + e.reason_code + ": adjusted_penalty " +
                                              e.adjusted_penalty.to_string() + " must lie in [-3, 0]");
    }
    if (!e.precondition.valid()) {
      try {
        e.precondition = dsl::parse_expression(e.precondition_text);
      } catch (const Error& err) {
        throw Error(ErrorCode::expr, "reason " + e.reason_code + " precondition: " +
                                         std::string(error_code_name(err.code())) + " " + err.detail(),
                    err.offset());
      }
    }
    std::sort(e.applicable_clause_ids.begin(), e.applicable_clause_ids.end());
  }
  entries_ = std::move(entries);
}

const OverrideEntry* OverrideOntology::find(std::string_view reason_code) const {
  for (const auto& e : entries_) {
    if (e.reason_code == reason_code) return &e;
  }
  return nullptr;
}

OverrideOntology load_ontology(std::string_view document_text) {
  const json doc = parse_json_document(document_text);
  if (!doc.is_array()) throw Error(ErrorCode::syntax, "ontology document must be a JSON array");
  std::vector<OverrideEntry> entries;
  for (const auto& j : doc) {
    OverrideEntry e;
    e.reason_code = require_string(j, "reason_code", "ontology entry");
    const std::string where = "ontology entry " + e.reason_code;
    e.description = optional_string(j, "description", where);
    e.precondition_text = require_string(j, "precondition", where);
    const json& penalty = require(j, "adjusted_penalty", where);
    if (!penalty.is_number()) throw Error(ErrorCode::syntax, where + ": adjusted_penalty must be a number");
    e.adjusted_penalty = Points::from_double(penalty.get<double>());
    e.applicable_clause_ids = string_list(j, "applicable_clause_ids", where);
    entries.push_back(std::move(e));
  }
  return OverrideOntology(std::move(entries));
}

json ontology_to_json(const OverrideOntology& o) {
  json out = json::array();
  for (const auto& e : o.entries()) {
    out.push_back({{"reason_code", e.reason_code},
                   {"description", e.description},
                   {"precondition", e.precondition_text},
                   {"adjusted_penalty", e.adjusted_penalty.to_double()},
                   {"applicable_clause_ids", e.applicable_clause_ids}});
  }
  return out;
}

std::string_view rejection_name(OverrideRejection r) noexcept {
  switch (r) {
    case OverrideRejection::unsanctioned: return "UNSANCTIONED";
    case OverrideRejection::precondition_failed: return "PRECONDITION_FAILED";
    case OverrideRejection::no_justification: return "NO_JUSTIFICATION";
  }
  return "UNSANCTIONED";
}

namespace {

bool is_blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

}  // namespace

OverrideDecision apply_override(Points base_points, const OverrideRecord& request, const OverrideOntology& ontology,
                                const dsl::EvaluationEnv& env, const GuidelineClause* clause) {
  if (base_points.sign() > 0) {
    throw Error(ErrorCode::positive_base, "overrides apply to penalties only; clause " + request.clause_id +
                                              " carries " + base_points.to_string());
  }
  auto reject = [&](OverrideRejection r) { return OverrideDecision{base_points, false, r}; };

  const OverrideEntry* entry = ontology.find(request.reason_code);
  if (!entry) return reject(OverrideRejection::unsanctioned);
  const bool listed_by_entry = std::binary_search(entry->applicable_clause_ids.begin(),
                                                  entry->applicable_clause_ids.end(), request.clause_id);
  const bool listed_by_clause =
      clause && clause->id == request.clause_id &&
      std::binary_search(clause->sanctioned_reasons.begin(), clause->sanctioned_reasons.end(), request.reason_code);
  if (!listed_by_entry && !listed_by_clause) return reject(OverrideRejection::unsanctioned);

  if (dsl::evaluate_expression(entry->precondition, env) != dsl::TriState::true_) {
    return reject(OverrideRejection::precondition_failed);
  }
  if (is_blank(request.justification)) return reject(OverrideRejection::no_justification);

  return OverrideDecision{std::max(base_points, entry->adjusted_penalty), true, std::nullopt};
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw Error(ErrorCode::io, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string canonical_record_bytes(const OverrideRecord& r) {
  // nlohmann::json objects keep keys sorted, so dump() is canonical.
  json j{{"case_id", r.case_id},
         {"clause_id", r.clause_id},
         {"justification", r.justification},
         {"reason_code", r.reason_code},
         {"timestamp", r.timestamp}};
  return j.dump();
}

std::string chain_digest(std::string_view prev_hash, const OverrideRecord& r) {
  std::string data(prev_hash);
  data += canonical_record_bytes(r);
  return sha256_hex(data);
}

const std::string& OverrideLedger::tail_hash() const {
  return entries_.empty() ? kGenesisHash : entries_.back().hash;
}

const OverrideRecord& OverrideLedger::append(OverrideRecord record) {
  if (is_blank(record.justification)) {
    throw Error(ErrorCode::invalid, "override on " + record.clause_id + " lacks a justification");
  }
  const std::string& tail = tail_hash();
  if (record.prev_hash.empty()) {
    record.prev_hash = tail;
  } else if (record.prev_hash != tail) {
    throw Error(ErrorCode::hash_chain, "prev_hash " + record.prev_hash + " does not match ledger tail " + tail);
  }
  record.hash = chain_digest(record.prev_hash, record);
  entries_.push_back(std::move(record));
  return entries_.back();
}

LedgerVerification OverrideLedger::verify() const {
  std::string expected_prev = kGenesisHash;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.prev_hash != expected_prev) {
      return {false, i, "entry " + std::to_string(i) + ": prev_hash does not match the preceding entry"};
    }
    if (e.hash != chain_digest(e.prev_hash, e)) {
      return {false, i, "entry " + std::to_string(i) + ": hash does not match its contents"};
    }
    expected_prev = e.hash;
  }
  return {};
}

std::string OverrideLedger::to_ndjson() const {
  std::string out;
  for (const auto& e : entries_) out += override_record_to_json(e).dump() + "\n";
  return out;
}

OverrideLedger OverrideLedger::from_ndjson(std::string_view text) {
  OverrideLedger ledger;
  for (const auto& j : parse_ndjson(text)) ledger.entries_.push_back(override_record_from_json(j));
  return ledger;
}

OverrideLedger append_override(OverrideLedger ledger, OverrideRecord record) {
  ledger.append(std::move(record));
  return ledger;
}

}  // namespace guidescore
