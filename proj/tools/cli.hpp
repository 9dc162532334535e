#pragma once

#include <iosfwd>

namespace argos::cli {

/// Parses and runs one command. Returns the process exit status; errors are
/// reported on `err` as a single JSON line.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace argos::cli
