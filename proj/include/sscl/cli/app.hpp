#pragma once

#include "sscl/error.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace sscl::cli {

// Process exit codes, one per error category.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,         // bad flags or config
  kExitIo = 3,
  kExitSchema = 4,        // schema mismatch, unknown class
  kExitParse = 5,         // malformed CSV
  kExitData = 6,          // insufficient, empty or unlabeled data
  kExitNoShared = 7,      // transfer schemas share nothing
  kExitNumeric = 8,       // non-finite gradient, zero-norm latent
  kExitCheckpoint = 9,
  kExitShape = 10,        // shape or label disagreement
};

int exit_code(ErrorCode code);

// Entry point shared by the binary and the tests. args excludes the program
// name. Machine-readable results go to `out`; logs go to stderr.
int run(const std::vector<std::string>& args, std::ostream& out);

inline constexpr const char* kToolVersion = "1.0.0";

}  // namespace sscl::cli
