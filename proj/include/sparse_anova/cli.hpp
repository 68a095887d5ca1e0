#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sparse_anova::cli {

//! Exit codes of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

//! Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "SPARSE_ANOVA_OUT_DIR";

//! Runs one subcommand; `args` excludes the program name. Reports go to
//! `out` and to files in the output directory, errors to `err` as one line
//! "error: code=<code> command=<name> message=<text>".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

} // namespace sparse_anova::cli
