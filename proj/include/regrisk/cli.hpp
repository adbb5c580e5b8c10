#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace regrisk::cli {

// Exit codes: 0 success, 2 configuration/parse error, 3 numerical failure.
// Results go to `out`; diagnostics go to `err` as one JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace regrisk::cli
