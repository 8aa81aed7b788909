#pragma once

#include <iosfwd>

namespace depthscope::cli {

/// Exit codes: 0 success, 1 usage/ingest errors, 2 analysis errors.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitAnalysis = 2;

/// Entry point of the depthscope command line tool.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace depthscope::cli
