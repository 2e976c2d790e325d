#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace hgnids::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

/// Parses argv and runs one subcommand. Never throws.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace hgnids::cli
