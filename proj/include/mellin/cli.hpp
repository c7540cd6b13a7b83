#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mellin {

// Runs the command-line driver on the given argument list (excluding the
// program name).  Normal results go to `out`, diagnostics to `err`.
//
// Returns the process exit code:
//   0  success,
//   1  domain error (invalid mathematical input, failed check),
//   2  usage error (bad flags, malformed input syntax).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// argv-style entry point used by the `mellin` executable.
int cli_main(int argc, char** argv);

}  // namespace mellin
