#pragma once
#include <string>
#include <vector>

namespace mbpt::cli {

// Runs one CLI invocation (argv without the program name).  Returns 0 on
// success, 1 on a domain error, 2 on a usage error (bad flags, missing
// files).  All numeric output is CSV with a header row and is byte-identical
// across runs with the same inputs and seeds.
int run(const std::vector<std::string>& args);

}  // namespace mbpt::cli
