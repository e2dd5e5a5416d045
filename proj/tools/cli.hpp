#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace thor::cli {

// Exit status: 0 success, 1 user or configuration error, 2 numeric fault.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace thor::cli
