#pragma once

#include <string>
#include <vector>

namespace guidescore {

enum class Severity { info, warning, error };

struct Diagnostic {
  Severity severity = Severity::info;
  std::string message;
  std::string location;
};

// exit_code: 0 ok, 1 gate/check failure, 2 input error.
struct CommandResult {
  int exit_code = 0;
  std::vector<Diagnostic> diagnostics;
  std::vector<std::string> artifacts;
  std::string output;  // human-readable summary
};

// `args` excludes the program name. Each command maps onto one engine
// operation; `serve` blocks until the server stops.
CommandResult execute(const std::vector<std::string>& args);

std::string render_diagnostics(const CommandResult& result);

}  // namespace guidescore
