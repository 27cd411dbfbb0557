#pragma once

#include "rieszapp/config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace rieszapp {

enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_validation = 2,
    exit_numerical = 3,
    exit_usage = 64,
};

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"equilibrium", "sample", "locallaw", "clt", "transport", "selftest"};
    return names;
}

// Validates, dispatches and maps exceptions to exit codes. Messages go to err,
// progress to log.
int run(const std::string& subcommand, const RunConfig& config, std::ostream& log, std::ostream& err);

struct SelftestCase {
    std::string name;
    bool passed = false;
    std::string detail;
};
std::vector<SelftestCase> run_selftest();

// %.17g, the format of every CSV number
std::string fmt(double x);

}  // namespace rieszapp
