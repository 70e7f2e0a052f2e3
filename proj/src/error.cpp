#include "guidescore/error.hpp"

namespace guidescore {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::syntax: return "E_SYNTAX";
    case ErrorCode::dup_id: return "E_DUP_ID";
    case ErrorCode::bad_id: return "E_BAD_ID";
    case ErrorCode::expr: return "E_EXPR";
    case ErrorCode::invalid: return "E_INVALID";
    case ErrorCode::no_jurisdiction: return "E_NO_JURISDICTION";
    case ErrorCode::not_found: return "E_NOT_FOUND";
    case ErrorCode::parse: return "E_PARSE";
    case ErrorCode::unknown_func: return "E_UNKNOWN_FUNC";
    case ErrorCode::unit: return "E_UNIT";
    case ErrorCode::type: return "E_TYPE";
    case ErrorCode::verdict_missing: return "E_VERDICT_MISSING";
    case ErrorCode::empty_run: return "E_EMPTY_RUN";
    case ErrorCode::dup_reason: return "E_DUP_REASON";
    case ErrorCode::bad_penalty: return "E_BAD_PENALTY";
    case ErrorCode::positive_base: return "E_POSITIVE_BASE";
    case ErrorCode::hash_chain: return "E_HASH_CHAIN";
    case ErrorCode::unknown_id: return "E_UNKNOWN_ID";
    case ErrorCode::bad_tier: return "E_BAD_TIER";
    case ErrorCode::empty: return "E_EMPTY";
    case ErrorCode::bad_rate: return "E_BAD_RATE";
    case ErrorCode::no_groups: return "E_NO_GROUPS";
    case ErrorCode::bad_targets: return "E_BAD_TARGETS";
    case ErrorCode::io: return "E_IO";
    case ErrorCode::port_in_use: return "E_PORT_IN_USE";
  }
  return "E_UNKNOWN";
}

namespace {

std::string render(ErrorCode code, const std::string& message, std::optional<std::size_t> offset) {
  std::string out{error_code_name(code)};
  if (offset) out += " at offset " + std::to_string(*offset);
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, std::string message, std::optional<std::size_t> offset)
    : std::runtime_error(render(code, message, offset)),
      code_(code),
      detail_(std::move(message)),
      offset_(offset) {}

}  // namespace guidescore
