#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>

namespace CLI {
class App;
}

namespace rvqmotion {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitIo = 4;

struct CliRun {
  std::unique_ptr<CLI::App> app;
  std::map<std::string, std::function<void()>> commands;  // keyed by subcommand name
};

// Builds the full command tree. Output of the selected command goes to `out`.
CliRun build_cli(std::ostream& out);

// Parses, runs the selected command and maps errors onto exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace rvqmotion
