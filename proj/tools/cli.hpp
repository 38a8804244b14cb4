#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace grfmask::cli {

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,
  kUsage = 2,       // bad flags or config
  kSeries = 3,      // coefficient series without a real deconvolution
  kShapeOrIo = 4,   // missing files, malformed inputs, shape mismatch
  kValidation = 5,  // a theory-vs-implementation predicate failed
};

// Runs one command line (args excludes the program name). Diagnostics go to `err`,
// summaries to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace grfmask::cli
