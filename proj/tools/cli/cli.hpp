#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace kgsumm::cli {

// Runs one command line. Returns the process exit code; never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kgsumm::cli
