#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qipl::cli {

// Process exit codes of qipl-lab.
enum ExitCode : int {
  kOk = 0,               // success, yes, accept
  kNo = 1,               // no, reject
  kInputError = 2,       // unreadable or malformed input, bad flags
  kDisagreement = 3,     // SDP and see-saw disagree beyond --tol
  kShapeViolation = 4,   // a transform stage rejected its input
  kPromiseViolation = 5  // instance outside the promise
};

inline constexpr const char* kReportSchema = "qipl.report/1";

// Runs one command line. The JSON report goes to `out` (or to --out);
// diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qipl::cli
