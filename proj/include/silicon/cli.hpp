#pragma once
// Command-line entry point. Kept in the library so tests can drive the
// exact CLI surface in-process.

#include <iosfwd>
#include <string>
#include <vector>

namespace silicon {

// Exit codes: 0 success, 1 validation failure, 2 runtime failure,
// 3 partial-data refusal.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace silicon
