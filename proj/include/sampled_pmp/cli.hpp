#ifndef SAMPLED_PMP_CLI_HPP
#define SAMPLED_PMP_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace sampled_pmp::cli {

/// Exit codes shared by every command.
enum ExitCode : int {
  kOk = 0,
  kCertificateFailure = 2,
  kNonConvergence = 3,
  kBadInput = 4,
};

/// Environment variable overriding the integrator substeps.
inline constexpr const char* kSubstepsEnv = "SAMPLED_PMP_SUBSTEPS";

/// Runs `solve`, `check`, `sweep` or `compare`. Diagnostics go to err.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);
/// Same, with args excluding the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sampled_pmp::cli

#endif  // SAMPLED_PMP_CLI_HPP
