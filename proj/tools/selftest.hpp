#pragma once

#include <ostream>
#include <string>

namespace estimlab::tools {

/// Runs every exhaustive oracle check and prints one ledger line per check.
/// fault: "" or "gaussian-coeff". Returns the process exit code.
int run_selftest(const std::string& fault, std::ostream& os);

}  // namespace estimlab::tools
