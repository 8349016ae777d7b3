// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace trelab::cli {

// Runs one command line. Returns 0 on success, 2 for user or configuration
// errors and 1 for internal failures.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace trelab::cli
