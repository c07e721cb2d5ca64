#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace zigev::cli {

/// Process exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,     // bad arguments, I/O failure, parse or validation error
  kNotConverged = 2,   // at least one fit (or every replicate of a study) failed numerically
};

/// Runs the command line. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

/// CSV text of a synthetic dataset shaped like a pediatric/adult dengue
/// serology survey: columns y, Age (years), Weight (kg). Infection follows the
/// zero-inflated GEV model with beta = (1.5379, -0.1003) on (1, Weight),
/// tau = 4.278 and a constant susceptibility logit of -0.3667. Synthetic data;
/// not a real sample.
std::string synthetic_dengue_csv(std::uint64_t seed, long n = 515);

}  // namespace zigev::cli
