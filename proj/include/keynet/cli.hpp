#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace keynet::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kReportSchema = "hybrid-keynet/report-v1";

enum ExitCode : int { kSuccess = 0, kDomainFailure = 1, kUsageOrIo = 2 };

// Runs one command line (args excludes the program name). Reports go to
// `out` (or --output), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace keynet::cli
