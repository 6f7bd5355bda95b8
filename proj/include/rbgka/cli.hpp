#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rbgka::cli {

// Front end for the `run` and `sweep` commands. Args exclude the program
// name. Exit codes: 0 success, 1 usage error or unreadable input, 2 scenario
// parse error, 3 invariant or protocol violation during a run.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rbgka::cli
