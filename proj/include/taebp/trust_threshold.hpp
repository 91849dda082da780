#pragma once
// Minimum persuadable trust: the smallest trust weight at which some signal
// can move the receiver off her default action.

#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "taebp/persuasion.hpp"

namespace taebp {

/// Sentinel threshold for an alternative no achievable posterior can make optimal.
inline constexpr double kUnpersuadable = std::numeric_limits<double>::infinity();

struct AlternativeThreshold {
    std::string action;
    double threshold;       // unclamped; kUnpersuadable if unreachable
    double delta_u0;        // U(a'|p0) - U(a0|p0)
    double delta_u_ft_max;  // max over point-mass posteriors of U(a'|p) - U(a0|p)
};

struct ThresholdReport {
    std::string default_action;
    double theta_star;      // clamped below at 0; kUnpersuadable when above 1
    double raw_theta_star;  // min over alternatives before clamping
    std::vector<AlternativeThreshold> alternatives;

    /// Throws UnknownAction if `action` is not an alternative.
    const AlternativeThreshold& alternative(std::string_view action) const;
};

/// General threshold over all alternatives. The maximum over signals is
/// realized by fully revealing posteriors (a point mass on each state).
/// `baseline` overrides the default action; by default it is the receiver's
/// sender-favoring best response at the prior.
ThresholdReport min_trust_general(const PersuasionGame& game, std::optional<std::string_view> baseline = {});

/// Two-state closed form. du_1 and du_2 are the gains of the alternative over
/// the default in states 1 and 2. Unclamped.
double min_trust_two_state(double prior_1, double du_1, double du_2);

/// Intersection game closed form, unclamped.
double min_trust_intersection_raw(double lambda, double r);
/// Intersection game closed form clamped to [0,1].
double min_trust_intersection(double lambda, double r);

struct ThresholdSensitivity {
    double d_lambda;
    double d_r;
};

/// Partial derivatives of the intersection threshold in lambda and r.
ThresholdSensitivity threshold_sensitivities(double lambda, double r);

/// Throws InvalidParameter unless lambda in (0,1) and r > 1.
void validate_intersection(double lambda, double r);

}  // namespace taebp
