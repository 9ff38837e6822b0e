#pragma once

#include <vector>
#include <string>

namespace strux::cli {

/// Entry point shared by the strux binary and the test suites. Returns the
/// process exit code: 0 success, 1 input/config error, 2 provider-fatal
/// error, 130 interrupted.
int dispatch(const std::vector<std::string>& args);
int dispatch(int argc, const char* const* argv);

}  // namespace strux::cli
