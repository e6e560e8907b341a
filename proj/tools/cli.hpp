#pragma once

#include <iosfwd>

namespace declutter::cli {

// Entry point shared by the executable and the tests. Returns the exit code:
// 0 success, 1 runtime failure, 2 usage or config error, 3 malformed input file.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace declutter::cli
