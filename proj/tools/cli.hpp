#pragma once

#include <iosfwd>
#include <vector>
#include <string>

namespace smot::cli {

/// Exit codes: 0 success, 1 internal error, 2 input/config validation,
/// 3 pairing/consistency.
enum ExitCode : int { kOk = 0, kInternal = 1, kValidation = 2, kPairing = 3 };

/// Entry point shared by the `smot` binary and the tests. args[0] is the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace smot::cli
