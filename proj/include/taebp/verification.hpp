#pragma once
// Self-check bundle behind `taebp verify`: golden numbers, cross-path
// consistency of the closed forms, the brute-force scheme oracle and a short
// theory-vs-simulation comparison.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace taebp {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerifyOptions {
    // Fault injection, used to demonstrate that the checks can fail.
    double b_scale = 1.0;                 // multiplies the leak probability before the consistency check
    std::optional<double> forced_theta;   // trust handed to the TA-EBP builder in the persuadability check

    std::size_t optimizer_grid = 2001;
    double sim_duration = 900.0;
    std::uint64_t seed = 1;
};

std::vector<CheckResult> run_verification(const VerifyOptions& options = {});

/// Name of the first failing check, if any.
std::optional<std::string> first_failure(const std::vector<CheckResult>& results);

}  // namespace taebp
