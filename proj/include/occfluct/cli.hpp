#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace occfluct::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitNumericalError = 3;

/// Runs one subcommand. args excludes the program name.
/// Results go to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 17 significant digits; "inf" for +infinity.
std::string format_number(double value);

}  // namespace occfluct::cli
