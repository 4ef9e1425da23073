#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rolekit::cli {

/// Runs one command line (args[0] is the program name). Returns the exit
/// code: 0 success, 1 validation or precondition failure, 2 transport
/// failure, 3 parse failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rolekit::cli
