#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "taebp/embodied_signal.hpp"
#include "taebp/error.hpp"
#include "taebp/persuasion.hpp"
#include "taebp/trust_threshold.hpp"

using namespace taebp;
using doctest::Approx;

namespace {

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return Errc::VerificationFailure;
}

const LikelihoodModel kLinear = LikelihoodModel::linear(2.0);

}  // namespace

TEST_CASE("linear likelihood model") {
    CHECK(kLinear.p_go(0.5) == Approx(0.25));
    CHECK(kLinear.p_stop(0.5) == Approx(0.75));
    CHECK(likelihood_ratio(kLinear, 1.0) == Approx(1.0));
    CHECK(kLinear.unbounded());
    CHECK(code_of([] { likelihood_ratio(kLinear, 2.0); }) == Errc::DomainError);
    CHECK(code_of([] { kLinear.p_go(2.5); }) == Errc::DomainError);
    CHECK(inverse_likelihood_ratio(kLinear, INFINITY) == 2.0);
    CHECK(code_of([] { inverse_likelihood_ratio(kLinear, -1.0); }) == Errc::InvalidParameter);
}

TEST_CASE("closed-form inverse agrees with bisection on the same curves") {
    const auto bisected = LikelihoodModel::custom(
        2.0, [](double s) { return s / 2.0; }, [](double s) { return 1.0 - s / 2.0; });
    for (double x : {0.01, 0.1, 0.5, 1.0, 2.0, 32.0 / 7.0, 50.0, 1e4}) {
        const double s = inverse_likelihood_ratio(kLinear, x);
        CHECK(s == Approx(inverse_likelihood_ratio(bisected, x)).epsilon(1e-10));
        CHECK(likelihood_ratio(kLinear, s) == Approx(x).epsilon(1e-12));
    }
}

TEST_CASE("bounded custom model") {
    // L ranges over [1/3, 3]; ratios outside are unreachable.
    const auto bounded = LikelihoodModel::custom(
        1.0, [](double s) { return 0.25 + 0.5 * s; }, [](double s) { return 0.75 - 0.5 * s; });
    CHECK_FALSE(bounded.unbounded());
    CHECK(inverse_likelihood_ratio(bounded, 1.0) == Approx(0.5).epsilon(1e-10));
    CHECK(code_of([&] { inverse_likelihood_ratio(bounded, 5.0); }) == Errc::OutOfRange);
    CHECK(code_of([&] { inverse_likelihood_ratio(bounded, INFINITY); }) == Errc::OutOfRange);
}

TEST_CASE("custom model must be strictly monotone") {
    CHECK(code_of([] {
              LikelihoodModel::custom(
                  2.0, [](double s) { return std::sin(s) * 0.5 + 0.5; }, [](double s) { return 1.0 - s / 2.0; });
          }) == Errc::InvalidParameter);
    CHECK(code_of([] {
              LikelihoodModel::custom(2.0, [](double s) { return s; }, [](double s) { return 1.0 - s / 2.0; });
          }) == Errc::InvalidParameter);
}

TEST_CASE("optimal nudge at the default parameters") {
    const double s = optimal_signal({0.2, 3.0, 0.6}, kLinear);
    CHECK(s == Approx(64.0 / 39.0).epsilon(1e-12));
    CHECK(likelihood_ratio(kLinear, s) == Approx(32.0 / 7.0).epsilon(1e-12));
    CHECK(optimal_signal({0.2, 3.0, 1.0}, kLinear) == Approx(16.0 / 11.0).epsilon(1e-12));
    CHECK(indifference_posterior(3.0) == Approx(0.4));
}

TEST_CASE("leak probability and persuaded fraction") {
    CHECK(scheme_parameter_b({0.2, 3.0, 0.6}) == Approx(7.0 / 32.0).epsilon(1e-12));
    CHECK(scheme_parameter_b({0.2, 3.0, 1.0}) == Approx(0.375).epsilon(1e-12));
    const auto policy = build_taebp_policy({0.2, 3.0, 0.6}, kLinear);
    REQUIRE(policy.persuadable);
    CHECK(policy.persuaded_fraction == Approx(0.375).epsilon(1e-12));
    CHECK(policy.theta_star == Approx(0.25));
    CHECK(policy.p_star == Approx(0.4));
    CHECK(policy.magnitude("nudge") == Approx(*policy.s_star));
    CHECK(policy.magnitude("none") == 0.0);
    CHECK(code_of([&] { policy.magnitude("wave"); }) == Errc::UnknownSignal);
}

TEST_CASE("committed scheme induces exactly the indifference posterior") {
    for (double lambda : {0.05, 0.1, 0.2, 0.3}) {
        for (double r : {1.5, 3.0, 6.0, 10.0}) {
            const double t_star = min_trust_intersection(lambda, r);
            for (int k = 1; k <= 5; ++k) {
                const double theta = std::min(1.0, t_star + (1.0 - t_star) * k / 5.0);
                const auto policy = build_taebp_policy({lambda, r, theta}, kLinear);
                if (lambda >= indifference_posterior(r)) continue;
                REQUIRE(policy.persuadable);
                const auto game = intersection_game(lambda, r);
                const Belief nudged = trust_posterior(game, *policy.scheme, kNudgeSignal, TrustLevel(theta));
                CHECK(nudged[0] == Approx(policy.p_star).epsilon(1e-9));
                CHECK(best_response(nudged, game) == "DC");
                if (policy.b < 1.0)
                    CHECK(best_response(trust_posterior(game, *policy.scheme, kNoSignal, TrustLevel(theta)), game) ==
                          "DR");
                CHECK(likelihood_ratio(kLinear, *policy.s_star) * policy.b == Approx(1.0).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("committed scheme beats every other scheme on a grid") {
    const IntersectionParams params{0.2, 3.0, 0.6};
    const auto game = intersection_game(params.lambda, params.r);
    const auto policy = build_taebp_policy(params, kLinear);
    const double committed = sender_value(game, *policy.scheme, TrustLevel(params.theta));
    const auto best = optimize_binary_scheme(game, TrustLevel(params.theta), 401);
    CHECK(committed >= best.value - 1e-12);
    CHECK(committed == Approx(2 * policy.persuaded_fraction - 1).epsilon(1e-12));
}

TEST_CASE("more trust needs a smaller nudge and tolerates more leakage") {
    double last_s = INFINITY, last_b = -1.0;
    for (int k = 0; k <= 30; ++k) {
        const double theta = 0.26 + 0.74 * k / 30.0;
        const auto policy = build_taebp_policy({0.2, 3.0, theta}, kLinear);
        REQUIRE(policy.persuadable);
        CHECK(*policy.s_star < last_s);
        CHECK(policy.b > last_b);
        last_s = *policy.s_star;
        last_b = policy.b;
    }
}

TEST_CASE("below the threshold the HV cannot be persuaded") {
    const auto policy = build_taebp_policy({0.2, 3.0, 0.2}, kLinear);
    CHECK_FALSE(policy.persuadable);
    CHECK_FALSE(policy.scheme.has_value());
    CHECK_FALSE(policy.s_star.has_value());
    CHECK(code_of([] { optimal_signal({0.2, 3.0, 0.2}, kLinear); }) == Errc::Unpersuadable);
}

TEST_CASE("trust exactly at the threshold needs the largest nudge and no leakage") {
    const auto policy = build_taebp_policy({0.2, 3.0, 0.25}, kLinear);
    CHECK(policy.persuadable);
    CHECK(*policy.s_star == 2.0);
    CHECK(policy.b == 0.0);
    const auto bounded = LikelihoodModel::custom(
        1.0, [](double s) { return 0.25 + 0.5 * s; }, [](double s) { return 0.75 - 0.5 * s; });
    CHECK(code_of([&] { optimal_signal({0.2, 3.0, 0.25}, bounded); }) == Errc::Boundary);
}

TEST_CASE("prior beyond indifference commits to an uninformative nudge") {
    const auto policy = build_taebp_policy({0.5, 3.0, 0.6}, kLinear);
    CHECK(policy.persuadable);
    CHECK(policy.b == 1.0);
    CHECK(*policy.s_star == Approx(1.0));
    CHECK(policy.persuaded_fraction == Approx(1.0));
}

TEST_CASE("no-trust baseline assumes full trust") {
    const auto policy = build_no_trust_policy(0.2, 3.0, kLinear);
    CHECK(policy.assumed.theta == 1.0);
    CHECK(policy.b == Approx(0.375));
    CHECK(*policy.s_star == Approx(16.0 / 11.0));
    // A 0.6-trust HV reading that scheme lands short of indifference.
    const auto game = intersection_game(0.2, 3.0);
    const Belief post = trust_posterior(game, *policy.scheme, kNudgeSignal, TrustLevel(0.6));
    CHECK(post[0] == Approx(0.32));
    CHECK(best_response(post, game) == "DR");
}

TEST_CASE("parameter validation") {
    CHECK(code_of([] { IntersectionParams{0.0, 3.0, 0.6}.validate(); }) == Errc::InvalidParameter);
    CHECK(code_of([] { IntersectionParams{0.2, 0.5, 0.6}.validate(); }) == Errc::InvalidParameter);
    CHECK(code_of([] { IntersectionParams{0.2, 3.0, 1.1}.validate(); }) == Errc::InvalidParameter);
    CHECK(code_of([] { LikelihoodModel::linear(0.0); }) == Errc::InvalidParameter);
}

TEST_CASE("sampled nudges follow the committed law") {
    const auto policy = build_taebp_policy({0.2, 3.0, 0.6}, kLinear);
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = 20000;
    int nudged = 0;
    for (int i = 0; i < n; ++i) {
        const bool go = u(gen) < 0.2;
        const double leak = u(gen);
        nudged += go || leak < policy.b;
    }
    CHECK(std::abs(nudged / double(n) - 0.375) < 4 * std::sqrt(0.375 * 0.625 / n));
}
