#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hahn::cli {

// Stable exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitEvaluation = 3;
inline constexpr int kExitNotConverged = 4;
inline constexpr int kExitVerification = 5;

/// Runs the command line `args` (program name excluded). Reports go to `out`
/// unless --out is given; diagnostics and warnings go to `err`. ANSI styling
/// is used only when `color` is set and HAHN_NO_COLOR is not.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        bool color = false);

}  // namespace hahn::cli
