#pragma once
// Embodied signals: the AV's forward nudge as a continuous signal, the
// optimal nudge magnitude, the leak probability and the committed
// trust-aware policy built from them.

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "taebp/persuasion.hpp"

namespace taebp {

inline constexpr std::string_view kNudgeSignal = "nudge";
inline constexpr std::string_view kNoSignal = "none";

enum class LikelihoodKind { Linear, Custom };

/// The human's intuitive likelihood of seeing a nudge s under each intent.
/// p_go must be strictly increasing and p_stop strictly decreasing on
/// (0, s_max) so that L(s) = p_go(s) / p_stop(s) is invertible.
class LikelihoodModel {
public:
    using Curve = std::function<double(double)>;

    /// p_go(s) = s / s_max, p_stop(s) = 1 - s / s_max.
    static LikelihoodModel linear(double s_max = 2.0);
    /// Validates range and strict monotonicity on 1000 sample points.
    static LikelihoodModel custom(double s_max, Curve p_go, Curve p_stop);

    LikelihoodKind kind() const noexcept { return kind_; }
    double s_max() const noexcept { return s_max_; }
    double p_go(double s) const;
    double p_stop(double s) const;
    /// True when p_stop(s_max) = 0, so L grows without bound.
    bool unbounded() const;

private:
    LikelihoodModel(LikelihoodKind kind, double s_max, Curve p_go, Curve p_stop)
        : kind_(kind), s_max_(s_max), p_go_(std::move(p_go)), p_stop_(std::move(p_stop)) {}

    LikelihoodKind kind_;
    double s_max_;
    Curve p_go_;
    Curve p_stop_;
};

double likelihood_ratio(const LikelihoodModel& model, double s);

/// Returns s with L(s) = x. Linear models use the closed form; custom models
/// are bisected to 1e-12 in s. x = +inf maps to s_max for unbounded models.
double inverse_likelihood_ratio(const LikelihoodModel& model, double x);

struct IntersectionParams {
    double lambda = 0.2;  // prior probability that the AV intends to go
    double r = 3.0;       // collision penalty
    double theta = 0.6;   // HV trust

    /// Throws InvalidParameter when out of range.
    void validate() const;
};

/// Belief in Go at which DR and DC are equally good: 2 / (2 + r).
double indifference_posterior(double r);

/// Smallest nudge whose trust posterior reaches the indifference posterior.
double optimal_signal(const IntersectionParams& params, const LikelihoodModel& model);

/// Leak probability pi(s*|Stop).
double scheme_parameter_b(const IntersectionParams& params);

struct TaebpPolicy {
    IntersectionParams assumed;  // parameters the policy was computed for
    bool persuadable = false;
    std::optional<double> s_star;
    double b = 0.0;
    std::optional<SignalingScheme> scheme;  // signals {nudge, none}
    double persuaded_fraction = 0.0;
    double theta_star = 0.0;
    double p_star = 0.0;

    /// Nudge magnitude emitted for a signal label of the committed scheme.
    double magnitude(std::string_view signal) const;
};

TaebpPolicy build_taebp_policy(const IntersectionParams& params, const LikelihoodModel& model);

/// Trust-agnostic baseline: the same construction assuming full trust.
TaebpPolicy build_no_trust_policy(double lambda, double r, const LikelihoodModel& model);

/// Flat key=value summary used by the CLI.
std::string to_key_value(const TaebpPolicy& policy);

}  // namespace taebp
