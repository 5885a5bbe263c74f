#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bridgediag::cli {

/// Runs the bridgediag command line. args excludes the program name.
/// Returns 0 on success, 1 on estimation errors and 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bridgediag::cli
