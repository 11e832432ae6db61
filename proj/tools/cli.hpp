#pragma once

#include <ostream>

namespace sitsent {

// Exit status: 0 success, 1 data or module error, 2 usage error.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out,
                 std::ostream& err);
int cli_dispatch(int argc, const char* const* argv);

}  // namespace sitsent
