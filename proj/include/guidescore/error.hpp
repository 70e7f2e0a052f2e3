#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace guidescore {

enum class ErrorCode {
  syntax,            // E_SYNTAX
  dup_id,            // E_DUP_ID
  bad_id,            // E_BAD_ID
  expr,              // E_EXPR
  invalid,           // E_INVALID (schema / invariant violation)
  no_jurisdiction,   // E_NO_JURISDICTION
  not_found,         // E_NOT_FOUND
  parse,             // E_PARSE
  unknown_func,      // E_UNKNOWN_FUNC
  unit,              // E_UNIT
  type,              // E_TYPE
  verdict_missing,   // E_VERDICT_MISSING
  empty_run,         // E_EMPTY_RUN
  dup_reason,        // E_DUP_REASON
  bad_penalty,       // E_BAD_PENALTY
  positive_base,     // E_POSITIVE_BASE
  hash_chain,        // E_HASH_CHAIN
  unknown_id,        // E_UNKNOWN_ID
  bad_tier,          // E_BAD_TIER
  empty,             // E_EMPTY
  bad_rate,          // E_BAD_RATE
  no_groups,         // E_NO_GROUPS
  bad_targets,       // E_BAD_TARGETS
  io,                // E_IO
  port_in_use,       // E_PORT_IN_USE
};

std::string_view error_code_name(ErrorCode code) noexcept;

// All engine failures surface as this exception. `offset` is a byte offset
// into whichever text was being parsed, when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::optional<std::size_t> offset = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  std::optional<std::size_t> offset() const noexcept { return offset_; }

 private:
  ErrorCode code_;
  std::string detail_;
  std::optional<std::size_t> offset_;
};

}  // namespace guidescore
