#include <iostream>
#include <string>
#include <vector>

#include "guidescore/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  const guidescore::CommandResult result = guidescore::execute(args);
  std::cout << result.output;
  std::cerr << guidescore::render_diagnostics(result);
  for (const auto& a : result.artifacts) std::cerr << "wrote " << a << "\n";
  return result.exit_code;
}
