#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gapblock::cli {

enum class Command { rho, split, angular, rotate, dkh, verify, dirac_threshold, demo };

struct RunConfig
{
    Command command = Command::rho;
    std::string input;
    std::string output;                  // empty: write the report to stdout
    std::optional<int> quad_nodes;
    std::optional<double> quad_radius;
    double tol = 1e-6;                   // oracle tolerance for split checks
    int order = 8;                       // series order for verify
    std::vector<double> gammas;          // empty: use the model's gamma, else 1
    int nmax = 12;
    double alpha = 1.0 / 137.035999;
    double delta_b = 1.0;
    std::string mode = "exact";          // dirac-threshold: exact | dkh | magnetic
    std::uint64_t seed = 1;
};

enum ExitCode : int { kPass = 0, kCheckFailure = 1, kInputError = 2 };

/// Runs one command. Reports go to config.output (atomically) or to out;
/// diagnostics and the failure list go to err.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv into a RunConfig and runs it. Parse errors give exit code 2.
int main(int argc, char** argv);

}  // namespace gapblock::cli
