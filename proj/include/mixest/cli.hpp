#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mixest {

// Runs the command line (args excludes the program name). Primary output
// goes to `out`, logs and the run manifest to `err`. Returns the process
// exit code: 0 ok, 2 input, 3 degenerate estimate, 4 leakage, 5 transport.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mixest
