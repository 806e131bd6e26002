#pragma once

// Command-line front end. run_cli() is the whole program minus main(), so
// tests can drive it in-process and inspect exit codes and output.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lss::cli {

inline constexpr const char* kToolName = "lss_sense";
inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitIo = 2,
  kExitVerifyFailed = 3,
  kExitInternal = 4,
};

/// Parses argv (argv[0] is the program name) and runs one subcommand.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct VerifyOptions {
  int nodes = 1024;
  std::uint64_t seed = 1;
  /// Negative control: perturbs the HDL null variance used by the Monte Carlo
  /// null-moment check so that check must fail.
  bool inject_fault = false;
};

struct VerifyCheck {
  std::string name;
  bool passed;
  double measured;   // worst observed deviation
  double tolerance;  // allowed deviation
  std::string detail;
};

/// The oracle suite behind the `verify` subcommand.
std::vector<VerifyCheck> run_verify_suite(const VerifyOptions& options);

}  // namespace lss::cli
