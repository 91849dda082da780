#include "taebp/embodied_signal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "taebp/error.hpp"
#include "taebp/format.hpp"
#include "taebp/trust_threshold.hpp"

namespace taebp {

namespace {

// theta within this distance of theta* counts as the boundary itself.
constexpr double kBoundaryTolerance = 1e-12;
constexpr int kMonotonicitySamples = 1000;
constexpr double kBisectionTolerance = 1e-12;

void check_signal_domain(const LikelihoodModel& model, double s) {
    if (!(s >= 0.0 && s <= model.s_max()))
        throw Error(Errc::DomainError, "nudge outside [0, s_max]");
}

}  // namespace

LikelihoodModel LikelihoodModel::linear(double s_max) {
    if (!(s_max > 0.0) || !std::isfinite(s_max)) throw Error(Errc::InvalidParameter, "s_max must be positive");
    return LikelihoodModel(
        LikelihoodKind::Linear, s_max, [s_max](double s) { return s / s_max; },
        [s_max](double s) { return 1.0 - s / s_max; });
}

LikelihoodModel LikelihoodModel::custom(double s_max, Curve p_go, Curve p_stop) {
    if (!(s_max > 0.0) || !std::isfinite(s_max)) throw Error(Errc::InvalidParameter, "s_max must be positive");
    if (!p_go || !p_stop) throw Error(Errc::InvalidParameter, "likelihood curves must be callable");

    double prev_go = 0.0, prev_stop = 0.0;
    for (int i = 0; i <= kMonotonicitySamples; ++i) {
        const double s = s_max * static_cast<double>(i) / kMonotonicitySamples;
        const double go = p_go(s);
        const double stop = p_stop(s);
        if (!(go >= 0.0 && go <= 1.0 && stop >= 0.0 && stop <= 1.0))
            throw Error(Errc::InvalidParameter, "likelihood values must lie in [0,1]");
        if (i > 0 && !(go > prev_go && stop < prev_stop))
            throw Error(Errc::InvalidParameter, "p_go must increase and p_stop decrease strictly");
        prev_go = go;
        prev_stop = stop;
    }
    return LikelihoodModel(LikelihoodKind::Custom, s_max, std::move(p_go), std::move(p_stop));
}

double LikelihoodModel::p_go(double s) const {
    check_signal_domain(*this, s);
    return p_go_(s);
}

double LikelihoodModel::p_stop(double s) const {
    check_signal_domain(*this, s);
    return p_stop_(s);
}

bool LikelihoodModel::unbounded() const { return p_stop_(s_max_) == 0.0; }

double likelihood_ratio(const LikelihoodModel& model, double s) {
    check_signal_domain(model, s);
    const double stop = model.p_stop(s);
    if (!(stop > 0.0)) throw Error(Errc::DomainError, "likelihood ratio diverges where p_stop = 0");
    return model.p_go(s) / stop;
}

double inverse_likelihood_ratio(const LikelihoodModel& model, double x) {
    if (!(x >= 0.0)) throw Error(Errc::InvalidParameter, "likelihood ratio must be nonnegative");
    if (std::isinf(x)) {
        if (model.unbounded()) return model.s_max();
        throw Error(Errc::OutOfRange, "ratio exceeds the model's supremum");
    }
    if (model.kind() == LikelihoodKind::Linear) return model.s_max() * x / (1.0 + x);

    auto ratio_at = [&](double s) {
        const double stop = model.p_stop(s);
        return stop > 0.0 ? model.p_go(s) / stop : std::numeric_limits<double>::infinity();
    };
    double lo = 0.0, hi = model.s_max();
    if (x < ratio_at(lo)) throw Error(Errc::OutOfRange, "ratio below L(0)");
    if (x > ratio_at(hi)) throw Error(Errc::OutOfRange, "ratio exceeds L(s_max)");
    while (hi - lo > kBisectionTolerance) {
        const double mid = 0.5 * (lo + hi);
        if (ratio_at(mid) < x)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

void IntersectionParams::validate() const {
    validate_intersection(lambda, r);
    if (!(theta >= 0.0 && theta <= 1.0)) throw Error(Errc::InvalidParameter, "theta must lie in [0,1]");
}

double indifference_posterior(double r) {
    if (!(r > 1.0) || !std::isfinite(r)) throw Error(Errc::InvalidParameter, "r must be finite and > 1");
    return 2.0 / (2.0 + r);
}

namespace {

void require_persuadable(const IntersectionParams& params) {
    const double theta_star = min_trust_intersection(params.lambda, params.r);
    if (params.theta < theta_star - kBoundaryTolerance)
        throw Error(Errc::Unpersuadable, "trust " + format_real(params.theta) + " is below threshold " +
                                             format_real(theta_star));
}

}  // namespace

double optimal_signal(const IntersectionParams& params, const LikelihoodModel& model) {
    params.validate();
    require_persuadable(params);
    const double lambda = params.lambda, theta = params.theta;
    const double p_star = indifference_posterior(params.r);

    const double numerator = (1.0 - lambda) * (p_star - (1.0 - theta) * lambda);
    const double denominator = lambda * (theta + (1.0 - theta) * lambda - p_star);
    if (numerator <= 0.0) return 0.0;  // the prior weight alone reaches p*
    if (std::abs(denominator) <= kBoundaryTolerance) {
        if (model.unbounded()) return model.s_max();
        throw Error(Errc::Boundary, "at theta* only an unbounded likelihood ratio persuades");
    }
    return inverse_likelihood_ratio(model, numerator / denominator);
}

double scheme_parameter_b(const IntersectionParams& params) {
    params.validate();
    require_persuadable(params);
    const double lambda = params.lambda, theta = params.theta;
    const double p_star = indifference_posterior(params.r);
    // Prior already at or past indifference: the nudge can always be sent.
    if (lambda >= p_star) return 1.0;

    const double denominator = (1.0 - lambda) * (p_star - (1.0 - theta) * lambda);
    if (!(denominator > 0.0)) throw Error(Errc::InvalidParameter, "p* must exceed (1 - theta) * lambda");
    const double b = lambda * (theta - p_star + (1.0 - theta) * lambda) / denominator;
    return std::clamp(b, 0.0, 1.0);
}

double TaebpPolicy::magnitude(std::string_view signal) const {
    if (signal == kNoSignal) return 0.0;
    if (signal == kNudgeSignal && s_star) return *s_star;
    throw Error(Errc::UnknownSignal, "no magnitude for signal '" + std::string(signal) + "'");
}

TaebpPolicy build_taebp_policy(const IntersectionParams& params, const LikelihoodModel& model) {
    params.validate();
    TaebpPolicy policy;
    policy.assumed = params;
    policy.theta_star = min_trust_intersection(params.lambda, params.r);
    policy.p_star = indifference_posterior(params.r);
    policy.persuadable = params.theta >= policy.theta_star - kBoundaryTolerance;
    if (!policy.persuadable) return policy;

    policy.b = scheme_parameter_b(params);
    if (params.lambda >= policy.p_star) {
        // Uninformative scheme; the magnitude is the one the human reads as neutral (L = 1).
        policy.s_star = inverse_likelihood_ratio(model, 1.0);
    } else {
        policy.s_star = optimal_signal(params, model);
    }
    policy.scheme = binary_scheme(std::string(kNudgeSignal), std::string(kNoSignal), 1.0, policy.b);
    policy.persuaded_fraction = params.lambda + policy.b * (1.0 - params.lambda);
    return policy;
}

TaebpPolicy build_no_trust_policy(double lambda, double r, const LikelihoodModel& model) {
    return build_taebp_policy({lambda, r, 1.0}, model);
}

std::string to_key_value(const TaebpPolicy& policy) {
    std::ostringstream out;
    out << "lambda=" << format_real(policy.assumed.lambda) << '\n'
        << "r=" << format_real(policy.assumed.r) << '\n'
        << "theta=" << format_real(policy.assumed.theta) << '\n'
        << "theta_star=" << format_real(policy.theta_star) << '\n'
        << "p_star=" << format_real(policy.p_star) << '\n'
        << "persuadable=" << (policy.persuadable ? "true" : "false") << '\n'
        << "s_star=" << (policy.s_star ? format_real(*policy.s_star) : std::string("NA")) << '\n'
        << "b=" << (policy.persuadable ? format_real(policy.b) : std::string("NA")) << '\n'
        << "persuaded_fraction=" << (policy.persuadable ? format_real(policy.persuaded_fraction) : std::string("NA"))
        << '\n';
    if (policy.scheme) {
        const auto& s = *policy.scheme;
        out << "scheme.go=" << format_real(s.prob(0, 0)) << ',' << format_real(s.prob(0, 1)) << '\n'
            << "scheme.stop=" << format_real(s.prob(1, 0)) << ',' << format_real(s.prob(1, 1)) << '\n';
    } else {
        out << "fallback=default safe policy (always yield)\n";
    }
    return out.str();
}

}  // namespace taebp
