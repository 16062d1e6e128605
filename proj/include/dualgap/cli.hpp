#pragma once

#include <string>
#include <vector>

#include "dualgap/genbounds.hpp"
#include "dualgap/theorems.hpp"

namespace dualgap::cli {

constexpr int kSchemaVersion = 1;

enum ExitCode { kOk = 0, kViolation = 1, kInputError = 2, kNonConvergence = 3 };

// Entry point of the dualgap executable. args excludes the program name.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

// Serializations shared by the CLI and the tests. NaN cannot be written:
// these throw std::domain_error when a value is NaN; ±∞ is written as null.
std::string theorem_report_json(const TheoremReport& report);
// Header n,trial,ipm,bound_term; LF endings; 17 significant digits.
std::string rate_curve_csv(const RateCurve& curve);

}  // namespace dualgap::cli
