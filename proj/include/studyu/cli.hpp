#pragma once

#include <ostream>

namespace studyu {

/// `studyu validate|publish|export|simulate`. Returns the process exit code:
/// 0 success, 1 domain error, 2 usage or I/O error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace studyu
