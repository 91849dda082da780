#include "taebp/verification.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "taebp/embodied_signal.hpp"
#include "taebp/error.hpp"
#include "taebp/format.hpp"
#include "taebp/persuasion.hpp"
#include "taebp/traffic_sim.hpp"
#include "taebp/trust_threshold.hpp"

namespace taebp {

namespace {

// 7 x 7 grid of (lambda, r) used by the consistency checks.
std::vector<std::pair<double, double>> lambda_r_grid() {
    std::vector<std::pair<double, double>> grid;
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) grid.emplace_back(0.05 + 0.05 * i, 1.5 + (10.0 - 1.5) * j / 6.0);
    return grid;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

CheckResult check(std::string name, const std::function<std::string()>& body) {
    CheckResult result{std::move(name), true, {}};
    try {
        result.detail = body();
        result.passed = result.detail.empty();
    } catch (const std::exception& e) {
        result.passed = false;
        result.detail = std::string("exception: ") + e.what();
    }
    return result;
}

std::string prosecutor_golden() {
    const PersuasionGame game = prosecutor_game();
    const SignalingScheme scheme({"g", "i"}, DenseMatrix{{1.0, 0.0}, {3.0 / 7.0, 4.0 / 7.0}});
    const Belief on_g = bayes_posterior(game, scheme, "g");
    const Belief on_i = bayes_posterior(game, scheme, "i");
    if (!near(on_g[0], 0.5, 1e-12) || !near(on_g[1], 0.5, 1e-12)) return "posterior on g is not (0.5, 0.5)";
    if (!near(on_i[0], 0.0, 1e-12) || !near(on_i[1], 1.0, 1e-12)) return "posterior on i is not (0, 1)";
    const TrustLevel full(1.0);
    const double value = sender_value(game, scheme, full);
    if (!near(value, 0.6, 1e-12)) return "conviction probability " + format_real(value) + " != 0.6";
    if (!near(sender_value(game, fully_revealing_scheme(game), full), 0.3, 1e-12))
        return "fully revealing value != 0.3";
    if (!near(sender_value(game, uninformative_scheme(game), full), 0.0, 1e-12))
        return "uninformative value != 0";
    return {};
}

std::string threshold_paths() {
    if (!near(min_trust_intersection(0.2, 3.0), 0.25, 1e-12)) return "theta*(0.2, 3) != 0.25";
    for (auto [lambda, r] : lambda_r_grid()) {
        const double closed = min_trust_intersection_raw(lambda, r);
        const double two_state = min_trust_two_state(lambda, r, -2.0);
        const double general = min_trust_general(intersection_game(lambda, r), "DR").raw_theta_star;
        if (!near(closed, two_state, 1e-12) || !near(closed, general, 1e-12))
            return "paths disagree at lambda=" + format_real(lambda) + " r=" + format_real(r);
    }
    return {};
}

std::string indifference_identity() {
    for (auto [lambda, r] : lambda_r_grid()) {
        const double theta_star = min_trust_intersection_raw(lambda, r);
        if (!near(indifference_posterior(r), (1.0 - theta_star) * lambda + theta_star, 1e-12))
            return "identity fails at lambda=" + format_real(lambda) + " r=" + format_real(r);
    }
    return {};
}

std::string sensitivities() {
    const double h = 1e-6;
    for (auto [lambda, r] : lambda_r_grid()) {
        const auto s = threshold_sensitivities(lambda, r);
        if (!(s.d_lambda < 0.0 && s.d_r < 0.0)) return "nonnegative derivative at lambda=" + format_real(lambda);
        const double fd_lambda =
            (min_trust_intersection_raw(lambda + h, r) - min_trust_intersection_raw(lambda - h, r)) / (2 * h);
        const double fd_r = (min_trust_intersection_raw(lambda, r + h) - min_trust_intersection_raw(lambda, r - h)) / (2 * h);
        if (std::abs(fd_lambda - s.d_lambda) > 1e-5 * std::abs(s.d_lambda) ||
            std::abs(fd_r - s.d_r) > 1e-5 * std::abs(s.d_r))
            return "finite differences disagree at lambda=" + format_real(lambda) + " r=" + format_real(r);
    }
    return {};
}

std::string optimal_signal_golden() {
    const auto model = LikelihoodModel::linear(2.0);
    const double trusting = optimal_signal({0.2, 3.0, 1.0}, model);
    const double calibrated = optimal_signal({0.2, 3.0, 0.6}, model);
    if (!near(calibrated, 1.641, 1e-3)) return "s*(theta=0.6) = " + format_real(calibrated);
    if (!near(trusting, 1.455, 1e-3)) return "s*(theta=1) = " + format_real(trusting);
    return {};
}

std::string scheme_consistency(double b_scale) {
    const auto model = LikelihoodModel::linear(2.0);
    for (auto [lambda, r] : lambda_r_grid()) {
        const double theta_star = min_trust_intersection(lambda, r);
        for (int k = 1; k <= 5; ++k) {
            const double theta = std::min(1.0, theta_star + (1.0 - theta_star) * k / 5.0);
            const TaebpPolicy policy = build_taebp_policy({lambda, r, theta}, model);
            const double b = policy.b * b_scale;
            const double product = likelihood_ratio(model, *policy.s_star) * b;
            if (!near(product, 1.0, 1e-9))
                return "L(s*) * b = " + format_real(product) + " at lambda=" + format_real(lambda) +
                       " r=" + format_real(r) + " theta=" + format_real(theta);
        }
    }
    return {};
}

std::string persuadability(std::optional<double> forced_theta) {
    const IntersectionParams params{0.2, 3.0, forced_theta.value_or(0.6)};
    const TaebpPolicy policy = build_taebp_policy(params, LikelihoodModel::linear(2.0));
    if (!policy.persuadable)
        return "TA-EBP instance is unpersuadable (theta=" + format_real(params.theta) + " < theta*=" +
               format_real(policy.theta_star) + ")";
    const PersuasionGame game = intersection_game(params.lambda, params.r);
    const Belief post = trust_posterior(game, *policy.scheme, kNudgeSignal, TrustLevel(params.theta));
    if (post[0] < policy.p_star - kDerivedTolerance) return "nudge posterior below p*";
    if (best_response(post, game) != "DC") return "nudge does not induce DC";
    return {};
}

std::string optimizer_cross_check(std::size_t grid) {
    const double step = 1.0 / static_cast<double>(grid - 1);
    const auto judge = optimize_binary_scheme(prosecutor_game(), TrustLevel(1.0), grid);
    // Either signal label may carry the persuasive role.
    const auto& s = judge.scheme;
    const std::size_t conv = s.prob(0, 0) >= s.prob(0, 1) ? 0 : 1;
    if (!near(s.prob(0, conv), 1.0, step) || !near(s.prob(1, conv), 3.0 / 7.0, step))
        return "prosecutor optimum not at (1, 3/7)";
    if (!near(judge.value, 0.6, 1e-3)) return "prosecutor optimum value " + format_real(judge.value);

    const auto av = optimize_binary_scheme(intersection_game(0.2, 3.0), TrustLevel(0.6), grid);
    const TaebpPolicy policy = build_taebp_policy({0.2, 3.0, 0.6}, LikelihoodModel::linear(2.0));
    const double closed = sender_value(intersection_game(0.2, 3.0), *policy.scheme, TrustLevel(0.6));
    if (!near(av.value, -0.25, 1e-3) || !near(closed, 2 * policy.persuaded_fraction - 1.0, 1e-9))
        return "intersection optimum " + format_real(av.value) + " vs closed form " + format_real(closed);
    return {};
}

std::string theory_vs_sim(double duration, std::uint64_t seed) {
    SimConfig config;
    config.duration = duration;
    config.seed = seed;
    std::ostringstream issues;

    config.policy = Policy::Taebp;
    const RunResult taebp = run(config);
    const double n = static_cast<double>(taebp.metrics.crossings);
    const double pf = taebp.committed->persuaded_fraction;
    if (taebp.metrics.crossings == 0) return "no TA-EBP encounters";
    if (taebp.metrics.collisions != 0) issues << "TA-EBP collisions=" << taebp.metrics.collisions << "; ";
    if (std::abs(taebp.metrics.dc_rate - pf) > 3.0 * std::sqrt(pf * (1 - pf) / n))
        issues << "TA-EBP dc_rate " << format_real(taebp.metrics.dc_rate) << " outside band; ";

    config.policy = Policy::NoTrust;
    const RunResult no_trust = run(config);
    const double m = static_cast<double>(no_trust.metrics.crossings);
    const double lambda = config.params.lambda;
    if (no_trust.metrics.crossings == 0) return "no No-Trust encounters";
    if (std::abs(no_trust.metrics.collision_rate - lambda) > 3.0 * std::sqrt(lambda * (1 - lambda) / m))
        issues << "No-Trust collision_rate " << format_real(no_trust.metrics.collision_rate) << " outside band; ";
    if (no_trust.metrics.dc_count != 0) issues << "No-Trust dc_count nonzero; ";
    return issues.str();
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
    std::vector<CheckResult> results;
    results.push_back(check("prosecutor_golden", prosecutor_golden));
    results.push_back(check("threshold_paths", threshold_paths));
    results.push_back(check("indifference_identity", indifference_identity));
    results.push_back(check("threshold_sensitivities", sensitivities));
    results.push_back(check("optimal_signal_golden", optimal_signal_golden));
    results.push_back(check("scheme_consistency", [&] { return scheme_consistency(options.b_scale); }));
    results.push_back(check("persuadability", [&] { return persuadability(options.forced_theta); }));
    results.push_back(check("optimizer_cross_check", [&] { return optimizer_cross_check(options.optimizer_grid); }));
    results.push_back(check("theory_vs_simulation", [&] { return theory_vs_sim(options.sim_duration, options.seed); }));
    return results;
}

std::optional<std::string> first_failure(const std::vector<CheckResult>& results) {
    for (const auto& r : results)
        if (!r.passed) return r.name;
    return std::nullopt;
}

}  // namespace taebp
