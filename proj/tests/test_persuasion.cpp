#include <cmath>
#include <random>

#include "doctest.h"
#include "taebp/error.hpp"
#include "taebp/persuasion.hpp"

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

// Prosecutor commits to: always "g" when guilty, "g" w.p. 3/7 when innocent.
SignalingScheme prosecutor_scheme() { return binary_scheme("g", "i", 1.0, 3.0 / 7.0); }

}  // namespace

TEST_CASE("prosecutor posteriors and conviction rate") {
    const auto game = prosecutor_game();
    const auto scheme = prosecutor_scheme();

    CHECK(signal_probability(game, scheme, 0) == Approx(0.6).epsilon(1e-12));
    const Belief on_g = bayes_posterior(game, scheme, "g");
    CHECK(on_g[0] == Approx(0.5).epsilon(1e-12));
    CHECK(on_g[1] == Approx(0.5).epsilon(1e-12));
    const Belief on_i = bayes_posterior(game, scheme, "i");
    CHECK(on_i[0] == 0.0);
    CHECK(on_i[1] == Approx(1.0).epsilon(1e-12));

    // The judge is indifferent after "g"; ties go the prosecutor's way.
    CHECK(best_response(on_g, game) == "convict");
    CHECK(best_response(on_i, game) == "acquit");
    CHECK(std::abs(sender_value(game, scheme, TrustLevel(1.0)) - 0.6) < 1e-12);
}

TEST_CASE("tie handling follows the requested rule") {
    const auto game = prosecutor_game();
    const Belief even = Belief::from({0.5, 0.5});
    CHECK(best_response(even, game, TieBreak::FavorSender) == "convict");
    CHECK(best_response(even, game, TieBreak::FirstListed) == "convict");

    // Reverse action order: first-listed now picks acquit.
    PersuasionGame flipped({"guilty", "innocent"}, {"acquit", "convict"}, Belief::from({0.3, 0.7}),
                           DenseMatrix{{0, 1}, {1, 0}}, DenseMatrix{{0, 1}, {0, 1}});
    CHECK(best_response(even, flipped, TieBreak::FirstListed) == "acquit");
    CHECK(best_response(even, flipped, TieBreak::FavorSender) == "convict");
}

TEST_CASE("expected utility by hand") {
    const auto game = intersection_game(0.2, 3.0);
    const Belief prior = game.prior();
    CHECK(expected_utility(prior, game, "DR", Side::Receiver) == Approx(0.2 * -3.0 + 0.8 * 1.0));
    CHECK(expected_utility(prior, game, "DC", Side::Receiver) == Approx(-0.8));
    CHECK(expected_utility(prior, game, "DC", Side::Sender) == Approx(1.0));
    CHECK(best_response(prior, game) == "DR");
    CHECK(code_of([&] { expected_utility(prior, game, "honk", Side::Receiver); }) == Errc::UnknownAction);
}

TEST_CASE("trust posterior interpolates prior and Bayes posterior") {
    const auto game = prosecutor_game();
    const auto scheme = prosecutor_scheme();
    const Belief none = trust_posterior(game, scheme, "g", TrustLevel(0.0));
    CHECK(none[0] == Approx(0.3));
    const Belief full = trust_posterior(game, scheme, "g", TrustLevel(1.0));
    CHECK(full[0] == Approx(0.5));
    const Belief half = trust_posterior(game, scheme, "g", TrustLevel(0.4));
    CHECK(half[0] == Approx(0.6 * 0.3 + 0.4 * 0.5));
}

TEST_CASE("a signal that is never sent has no posterior") {
    const auto game = prosecutor_game();
    const auto scheme = binary_scheme("a", "b", 1.0, 1.0);
    CHECK(code_of([&] { bayes_posterior(game, scheme, "b"); }) == Errc::ZeroSignalProbability);
    CHECK(code_of([&] { bayes_posterior(game, scheme, "c"); }) == Errc::UnknownSignal);
    // It still contributes nothing to the sender's value.
    CHECK(sender_value(game, scheme, TrustLevel(1.0)) == Approx(0.0));
}

TEST_CASE("reference schemes") {
    const auto game = prosecutor_game();
    const auto reveal = fully_revealing_scheme(game);
    for (std::size_t k = 0; k < game.num_states(); ++k) {
        const Belief post = bayes_posterior(game, reveal, k);
        CHECK(post == Belief::point_mass(game.num_states(), k));
    }
    CHECK(sender_value(game, reveal, TrustLevel(1.0)) == Approx(0.3));
    const auto silent = uninformative_scheme(game);
    CHECK(silent.num_signals() == 1);
    CHECK(sender_value(game, silent, TrustLevel(1.0)) == Approx(0.0));
}

TEST_CASE("construction rejects malformed inputs") {
    CHECK(code_of([] { Belief::from({0.5, 0.6}); }) == Errc::InvalidBelief);
    CHECK(code_of([] { Belief::from({1.2, -0.2}); }) == Errc::InvalidBelief);
    CHECK(code_of([] { TrustLevel(1.5); }) == Errc::InvalidParameter);
    CHECK(code_of([] { TrustLevel(-0.1); }) == Errc::InvalidParameter);
    CHECK(code_of([] {
              PersuasionGame({"x"}, {"a", "b"}, Belief::from({1.0}), DenseMatrix{{0, 1}}, DenseMatrix{{0, 1}});
          }) == Errc::InvalidGame);
    CHECK(code_of([] {
              PersuasionGame({"x", "x"}, {"a", "b"}, Belief::from({0.5, 0.5}), DenseMatrix{{0, 1}, {1, 0}},
                             DenseMatrix{{0, 1}, {1, 0}});
          }) == Errc::InvalidGame);
    CHECK(code_of([] {
              PersuasionGame({"x", "y"}, {"a", "b"}, Belief::from({0.5, 0.5}), DenseMatrix{{0, 1, 2}, {1, 0, 2}},
                             DenseMatrix{{0, 1}, {1, 0}});
          }) == Errc::InvalidGame);
    CHECK(code_of([] { SignalingScheme({"s", "t"}, DenseMatrix{{0.5, 0.6}, {0.5, 0.5}}); }) == Errc::InvalidScheme);
    CHECK(code_of([] { SignalingScheme({"s", "s"}, DenseMatrix{{0.5, 0.5}, {0.5, 0.5}}); }) == Errc::InvalidScheme);
}

TEST_CASE("Bayes plausibility and normalization on random schemes") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double p = u(gen) * 0.9;
        PersuasionGame game({"w1", "w2", "w3"}, {"a", "b"}, Belief::from({p, (1 - p) / 2, (1 - p) / 2}),
                            DenseMatrix{{1, 0}, {0, 1}, {0.5, 0.2}}, DenseMatrix{{1, 0}, {1, 0}, {1, 0}});
        DenseMatrix probs(3, 3);
        for (std::size_t w = 0; w < 3; ++w) {
            double total = 0;
            for (std::size_t s = 0; s < 3; ++s) total += probs(w, s) = u(gen);
            for (std::size_t s = 0; s < 3; ++s) probs(w, s) /= total;
        }
        const SignalingScheme scheme({"s1", "s2", "s3"}, probs);
        const double theta = u(gen);
        double averaged[3] = {0, 0, 0};
        for (std::size_t s = 0; s < 3; ++s) {
            const Belief post = trust_posterior(game, scheme, s, TrustLevel(theta));
            double sum = 0;
            for (std::size_t w = 0; w < 3; ++w) {
                CHECK(post[w] >= 0.0);
                sum += post[w];
                averaged[w] += signal_probability(game, scheme, s) * post[w];
            }
            CHECK(sum == Approx(1.0).epsilon(1e-12));
        }
        // The signal-weighted average of posteriors is the prior, at any trust.
        for (std::size_t w = 0; w < 3; ++w) CHECK(averaged[w] == Approx(game.prior()[w]).epsilon(1e-12));
    }
}

TEST_CASE("sender value is monotone in trust for the prosecutor scheme") {
    const auto game = prosecutor_game();
    const auto scheme = prosecutor_scheme();
    double previous = -1.0;
    for (int k = 0; k <= 20; ++k) {
        const double v = sender_value(game, scheme, TrustLevel(k / 20.0));
        CHECK(v >= previous - 1e-12);
        previous = v;
    }
}

TEST_CASE("grid optimizer recovers the prosecutor optimum") {
    const auto game = prosecutor_game();
    const auto best = optimize_binary_scheme(game, TrustLevel(1.0), 701);
    CHECK(best.value == Approx(0.6).epsilon(1e-3));
    // Either labelling of the two signals is optimal; the persuasive one has
    // probability 1 under guilt and about 3/7 under innocence.
    const std::size_t s = best.scheme.prob(0, 0) > 0.5 ? 0 : 1;
    CHECK(best.scheme.prob(0, s) == Approx(1.0));
    CHECK(std::abs(best.scheme.prob(1, s) - 3.0 / 7.0) <= 1.0 / 700.0);
    CHECK(code_of([&] { optimize_binary_scheme(game, TrustLevel(1.0), 1); }) == Errc::InvalidParameter);
}

TEST_CASE("optimizer never beats its own re-evaluation") {
    const auto game = intersection_game(0.2, 3.0);
    for (double theta : {0.1, 0.3, 0.6, 1.0}) {
        const auto best = optimize_binary_scheme(game, TrustLevel(theta), 201);
        CHECK(best.value == Approx(sender_value(game, best.scheme, TrustLevel(theta))).epsilon(1e-12));
        CHECK(best.value >= sender_value(game, uninformative_scheme(game), TrustLevel(theta)) - 1e-12);
    }
}
