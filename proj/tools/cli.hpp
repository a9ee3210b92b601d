#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mmtail::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode { kOk = 0, kUnexpected = 1, kValidation = 2, kNumerical = 3 };

/// Runs one subcommand. args excludes the program name. Reports go to `out` unless --out
/// names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace mmtail::cli
