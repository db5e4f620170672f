// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace ftns {

/// Parses argv, dispatches one subcommand and returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ftns
