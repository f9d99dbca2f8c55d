#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace resodyn::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
    kOk = 0,
    kValidationFailed = 1,
    kConfigError = 2,
    kComputeError = 3,
};

/// Entry point behind tools/resodyn; args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Evaluates f(0..count-1) on `threads` workers; results come back in index order.
std::vector<std::string> parallel_rows(int count, int threads, const std::function<std::string(int)>& f);

/// RESODYN_THREADS if set and valid, else the hardware concurrency (≥ 1).
int default_threads();

/// Column documentation for one subcommand ("" lists all).
std::string describe_output(const std::string& subcommand);

}  // namespace resodyn::cli
