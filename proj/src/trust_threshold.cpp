#include "taebp/trust_threshold.hpp"

#include <algorithm>
#include <cmath>

#include "taebp/error.hpp"

namespace taebp {

const AlternativeThreshold& ThresholdReport::alternative(std::string_view action) const {
    for (const auto& alt : alternatives)
        if (alt.action == action) return alt;
    throw Error(Errc::UnknownAction, "'" + std::string(action) + "' is not an alternative action");
}

ThresholdReport min_trust_general(const PersuasionGame& game, std::optional<std::string_view> baseline) {
    const std::size_t n_actions = game.num_actions();
    if (n_actions < 2) throw Error(Errc::NoAlternativeAction, "game has a single action");

    const Belief& prior = game.prior();
    const std::size_t a0 = baseline ? game.action_index(*baseline) : best_response_index(prior, game);

    ThresholdReport report;
    report.default_action = game.actions()[a0];
    report.raw_theta_star = kUnpersuadable;

    for (std::size_t a = 0; a < n_actions; ++a) {
        if (a == a0) continue;
        const double du0 =
            expected_utility(prior, game, a, Side::Receiver) - expected_utility(prior, game, a0, Side::Receiver);
        double du_ft = -std::numeric_limits<double>::infinity();
        for (std::size_t w = 0; w < game.num_states(); ++w)
            du_ft = std::max(du_ft, game.utility(Side::Receiver, w, a) - game.utility(Side::Receiver, w, a0));

        const double denom = du_ft - du0;
        double threshold;
        if (du0 >= 0.0) {
            // Already weakly preferred under the prior.
            threshold = denom > 0.0 ? -du0 / denom : 0.0;
        } else if (du_ft < 0.0 || !(denom > 0.0)) {
            threshold = kUnpersuadable;
        } else {
            threshold = -du0 / denom;
        }
        report.alternatives.push_back({game.actions()[a], threshold, du0, du_ft});
        report.raw_theta_star = std::min(report.raw_theta_star, threshold);
    }
    report.theta_star = report.raw_theta_star > 1.0 ? kUnpersuadable : std::max(report.raw_theta_star, 0.0);
    return report;
}

double min_trust_two_state(double prior_1, double du_1, double du_2) {
    if (!(prior_1 > 0.0 && prior_1 < 1.0)) throw Error(Errc::InvalidParameter, "prior_1 must lie in (0,1)");
    if (du_1 == du_2) throw Error(Errc::DegenerateUtilities, "equal utility gains in both states");
    const double prior_2 = 1.0 - prior_1;
    return -(prior_1 * du_1 + prior_2 * du_2) / (prior_2 * (du_1 - du_2));
}

void validate_intersection(double lambda, double r) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw Error(Errc::InvalidParameter, "lambda must lie in (0,1)");
    if (!(r > 1.0) || !std::isfinite(r)) throw Error(Errc::InvalidParameter, "r must be finite and > 1");
}

double min_trust_intersection_raw(double lambda, double r) {
    validate_intersection(lambda, r);
    return (2.0 * (1.0 - lambda) - r * lambda) / ((1.0 - lambda) * (r + 2.0));
}

double min_trust_intersection(double lambda, double r) {
    return std::clamp(min_trust_intersection_raw(lambda, r), 0.0, 1.0);
}

ThresholdSensitivity threshold_sensitivities(double lambda, double r) {
    validate_intersection(lambda, r);
    const double one_minus = 1.0 - lambda;
    return {-r / ((r + 2.0) * one_minus * one_minus), 2.0 / ((lambda - 1.0) * (r + 2.0) * (r + 2.0))};
}

}  // namespace taebp
