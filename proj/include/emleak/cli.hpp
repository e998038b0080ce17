#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace emleak::cli {

enum class ExitStatus : int {
    success = 0,
    domain_error = 1,  // message on the error stream, prefixed "error:"
    usage_error = 2,   // "error:" line followed by the synopsis
};

/// Runs one command line (`args` excludes the program name).
ExitStatus run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace emleak::cli
