#pragma once

#include <ostream>
#include <span>
#include <string>

namespace scramblekit::cli {

/// Runs one command line. `args` excludes the program name. Reports go to
/// `out` unless redirected with --out; diagnostics go to `err`.
/// Returns 0 on success, 1 on data or I/O errors, 2 on usage errors.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace scramblekit::cli
