#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace surgrec::cli {

// Runs one command line (without the program name). Returns the process exit
// status: 0 success, 1 runtime failure, 2 usage or config error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Full help text: every subcommand with its flags.
std::string help_text();

}  // namespace surgrec::cli
