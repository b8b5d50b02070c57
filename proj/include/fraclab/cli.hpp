#pragma once

#include <string>
#include <vector>

namespace fraclab::cli {

/// Exit codes: 0 success, 1 runtime/solver failure, 2 usage or hypothesis error.
constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

/// Full CLI entry point (parse + dispatch + artifact writing). argv excludes
/// the program name.
int run(const std::vector<std::string>& argv);

}  // namespace fraclab::cli
