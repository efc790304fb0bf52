#pragma once

#include <iosfwd>

namespace gearopt::cli {

// Exit codes.
enum : int {
    ok = 0,
    parse_failure = 2,
    fit_failure = 3,
    infeasible = 4,
    validation_failure = 5,
    internal_failure = 6,
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace gearopt::cli
