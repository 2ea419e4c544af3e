#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace curvy::cli {

/// Runs the `curvy` command line (args excludes the program name) and returns
/// the process exit code: 0 success, 1 usage, 2 data/geometry, 3 divergence.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace curvy::cli
