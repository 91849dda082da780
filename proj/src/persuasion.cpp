#include "taebp/persuasion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "taebp/error.hpp"

namespace taebp {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::InvalidGame: return "InvalidGame";
        case Errc::InvalidBelief: return "InvalidBelief";
        case Errc::InvalidScheme: return "InvalidScheme";
        case Errc::UnknownSignal: return "UnknownSignal";
        case Errc::UnknownAction: return "UnknownAction";
        case Errc::ZeroSignalProbability: return "ZeroSignalProbability";
        case Errc::NotTwoState: return "NotTwoState";
        case Errc::NoAlternativeAction: return "NoAlternativeAction";
        case Errc::DegenerateUtilities: return "DegenerateUtilities";
        case Errc::InvalidParameter: return "InvalidParameter";
        case Errc::DomainError: return "DomainError";
        case Errc::OutOfRange: return "OutOfRange";
        case Errc::Unpersuadable: return "Unpersuadable";
        case Errc::Boundary: return "Boundary";
        case Errc::ConfigError: return "ConfigError";
        case Errc::VerificationFailure: return "VerificationFailure";
    }
    return "Unknown";
}

namespace {

bool is_distribution(std::span<const double> probs, double tolerance) {
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0 && p <= 1.0)) return false;
        sum += p;
    }
    return std::abs(sum - 1.0) <= tolerance;
}

bool unique_labels(const std::vector<std::string>& labels) {
    return std::set<std::string>(labels.begin(), labels.end()).size() == labels.size();
}

std::size_t find_label(const std::vector<std::string>& labels, std::string_view label, Errc missing) {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) throw Error(missing, "no label '" + std::string(label) + "'");
    return static_cast<std::size_t>(it - labels.begin());
}

}  // namespace

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
        if (row.size() != cols_) throw Error(Errc::InvalidGame, "ragged matrix");
        data_.insert(data_.end(), row.begin(), row.end());
    }
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    DenseMatrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols()) throw Error(Errc::InvalidGame, "ragged matrix");
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
    }
    return m;
}

Belief Belief::from(std::vector<double> probs, double tolerance) {
    if (probs.empty()) throw Error(Errc::InvalidBelief, "empty belief");
    if (!is_distribution(probs, tolerance)) throw Error(Errc::InvalidBelief, "not a probability vector");
    return Belief(std::move(probs));
}

Belief Belief::point_mass(std::size_t size, std::size_t index) {
    if (index >= size) throw Error(Errc::InvalidBelief, "point mass index out of range");
    std::vector<double> probs(size, 0.0);
    probs[index] = 1.0;
    return Belief(std::move(probs));
}

TrustLevel::TrustLevel(double theta) : theta_(theta) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw Error(Errc::InvalidParameter, "trust must lie in [0,1]");
}

PersuasionGame::PersuasionGame(std::vector<std::string> states, std::vector<std::string> actions, Belief prior,
                               DenseMatrix receiver_utility, DenseMatrix sender_utility)
    : states_(std::move(states)),
      actions_(std::move(actions)),
      prior_(std::move(prior)),
      receiver_(std::move(receiver_utility)),
      sender_(std::move(sender_utility)) {
    if (states_.size() < 2 || actions_.size() < 2)
        throw Error(Errc::InvalidGame, "need at least two states and two actions");
    if (!unique_labels(states_) || !unique_labels(actions_)) throw Error(Errc::InvalidGame, "duplicate labels");
    if (prior_.size() != states_.size()) throw Error(Errc::InvalidGame, "prior dimension mismatch");
    for (double p : prior_.probs())
        if (!(p > 0.0)) throw Error(Errc::InvalidGame, "prior must lie in the interior of the simplex");
    for (const DenseMatrix* table : {&receiver_, &sender_}) {
        if (table->rows() != states_.size() || table->cols() != actions_.size())
            throw Error(Errc::InvalidGame, "utility table must be states x actions");
        for (std::size_t s = 0; s < table->rows(); ++s)
            for (double u : table->row(s))
                if (!std::isfinite(u)) throw Error(Errc::InvalidGame, "non-finite utility");
    }
}

std::size_t PersuasionGame::state_index(std::string_view label) const {
    return find_label(states_, label, Errc::InvalidGame);
}

std::size_t PersuasionGame::action_index(std::string_view label) const {
    return find_label(actions_, label, Errc::UnknownAction);
}

SignalingScheme::SignalingScheme(std::vector<std::string> signals, DenseMatrix probs)
    : signals_(std::move(signals)), probs_(std::move(probs)) {
    if (signals_.empty()) throw Error(Errc::InvalidScheme, "no signals");
    if (!unique_labels(signals_)) throw Error(Errc::InvalidScheme, "duplicate signal labels");
    if (probs_.cols() != signals_.size()) throw Error(Errc::InvalidScheme, "column count must equal signal count");
    if (probs_.rows() == 0) throw Error(Errc::InvalidScheme, "no state rows");
    for (std::size_t w = 0; w < probs_.rows(); ++w)
        if (!is_distribution(probs_.row(w), kConstructionTolerance))
            throw Error(Errc::InvalidScheme, "row " + std::to_string(w) + " is not a distribution");
}

std::size_t SignalingScheme::signal_index(std::string_view label) const {
    return find_label(signals_, label, Errc::UnknownSignal);
}

double signal_probability(const PersuasionGame& game, const SignalingScheme& scheme, std::size_t signal) {
    double total = 0.0;
    for (std::size_t w = 0; w < game.num_states(); ++w) total += scheme.prob(w, signal) * game.prior()[w];
    return total;
}

Belief bayes_posterior(const PersuasionGame& game, const SignalingScheme& scheme, std::size_t signal) {
    if (scheme.num_states() != game.num_states()) throw Error(Errc::InvalidScheme, "scheme/game state mismatch");
    if (signal >= scheme.num_signals()) throw Error(Errc::UnknownSignal, "signal index out of range");
    const double total = signal_probability(game, scheme, signal);
    if (!(total > 0.0))
        throw Error(Errc::ZeroSignalProbability, "signal '" + scheme.signals()[signal] + "' is never emitted");
    std::vector<double> post(game.num_states());
    for (std::size_t w = 0; w < post.size(); ++w) post[w] = scheme.prob(w, signal) * game.prior()[w] / total;
    return Belief::from(std::move(post), kDerivedTolerance);
}

Belief bayes_posterior(const PersuasionGame& game, const SignalingScheme& scheme, std::string_view signal) {
    return bayes_posterior(game, scheme, scheme.signal_index(signal));
}

Belief trust_posterior(const PersuasionGame& game, const SignalingScheme& scheme, std::size_t signal,
                       TrustLevel trust) {
    const Belief full = bayes_posterior(game, scheme, signal);
    const double theta = trust.value();
    std::vector<double> post(game.num_states());
    for (std::size_t w = 0; w < post.size(); ++w) post[w] = (1.0 - theta) * game.prior()[w] + theta * full[w];
    return Belief::from(std::move(post), kDerivedTolerance);
}

Belief trust_posterior(const PersuasionGame& game, const SignalingScheme& scheme, std::string_view signal,
                       TrustLevel trust) {
    return trust_posterior(game, scheme, scheme.signal_index(signal), trust);
}

double expected_utility(const Belief& belief, const PersuasionGame& game, std::size_t action, Side side) {
    if (action >= game.num_actions()) throw Error(Errc::UnknownAction, "action index out of range");
    if (belief.size() != game.num_states()) throw Error(Errc::InvalidBelief, "belief dimension mismatch");
    double total = 0.0;
    for (std::size_t w = 0; w < belief.size(); ++w) total += belief[w] * game.utility(side, w, action);
    return total;
}

double expected_utility(const Belief& belief, const PersuasionGame& game, std::string_view action, Side side) {
    return expected_utility(belief, game, game.action_index(action), side);
}

std::size_t best_response_index(const Belief& belief, const PersuasionGame& game, TieBreak tie_break) {
    std::vector<double> receiver(game.num_actions());
    for (std::size_t a = 0; a < receiver.size(); ++a) receiver[a] = expected_utility(belief, game, a, Side::Receiver);
    const double best = *std::max_element(receiver.begin(), receiver.end());

    std::size_t chosen = game.num_actions();
    double chosen_sender = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < receiver.size(); ++a) {
        if (receiver[a] < best - kTieTolerance) continue;
        if (tie_break == TieBreak::FirstListed) return a;
        const double sender = expected_utility(belief, game, a, Side::Sender);
        if (chosen == game.num_actions() || sender > chosen_sender) {
            chosen = a;
            chosen_sender = sender;
        }
    }
    return chosen;
}

const std::string& best_response(const Belief& belief, const PersuasionGame& game, TieBreak tie_break) {
    return game.actions()[best_response_index(belief, game, tie_break)];
}

double sender_value(const PersuasionGame& game, const SignalingScheme& scheme, TrustLevel trust,
                    TieBreak tie_break) {
    if (scheme.num_states() != game.num_states()) throw Error(Errc::InvalidScheme, "scheme/game state mismatch");
    double value = 0.0;
    for (std::size_t s = 0; s < scheme.num_signals(); ++s) {
        if (!(signal_probability(game, scheme, s) > 0.0)) continue;
        const std::size_t action = best_response_index(trust_posterior(game, scheme, s, trust), game, tie_break);
        for (std::size_t w = 0; w < game.num_states(); ++w)
            value += game.prior()[w] * scheme.prob(w, s) * game.utility(Side::Sender, w, action);
    }
    return value;
}

namespace {

// Mirrors trust_posterior + best_response_index for the two-state case
// without allocating; the arithmetic is term-for-term the same.
struct TwoStateEvaluator {
    const PersuasionGame& game;
    double theta;
    TieBreak tie_break;

    std::size_t respond(double weight_1, double weight_2, double total) const {
        const double p1 = game.prior()[0];
        const double p2 = game.prior()[1];
        const double b1 = (1.0 - theta) * p1 + theta * (weight_1 / total);
        const double b2 = (1.0 - theta) * p2 + theta * (weight_2 / total);
        const std::size_t n = game.num_actions();
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < n; ++a)
            best = std::max(best, b1 * game.utility(Side::Receiver, 0, a) + b2 * game.utility(Side::Receiver, 1, a));
        std::size_t chosen = n;
        double chosen_sender = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < n; ++a) {
            const double u = b1 * game.utility(Side::Receiver, 0, a) + b2 * game.utility(Side::Receiver, 1, a);
            if (u < best - kTieTolerance) continue;
            if (tie_break == TieBreak::FirstListed) return a;
            const double v = b1 * game.utility(Side::Sender, 0, a) + b2 * game.utility(Side::Sender, 1, a);
            if (chosen == n || v > chosen_sender) {
                chosen = a;
                chosen_sender = v;
            }
        }
        return chosen;
    }

    double value(double x, double y) const {
        const double p1 = game.prior()[0];
        const double p2 = game.prior()[1];
        double total = 0.0;
        const double rows[2][2] = {{x, 1.0 - x}, {y, 1.0 - y}};
        for (int s = 0; s < 2; ++s) {
            const double w1 = rows[0][s] * p1;
            const double w2 = rows[1][s] * p2;
            const double emitted = w1 + w2;
            if (!(emitted > 0.0)) continue;
            const std::size_t a = respond(w1, w2, emitted);
            total += p1 * rows[0][s] * game.utility(Side::Sender, 0, a) + p2 * rows[1][s] * game.utility(Side::Sender, 1, a);
        }
        return total;
    }
};

}  // namespace

SchemeSearchResult optimize_binary_scheme(const PersuasionGame& game, TrustLevel trust, std::size_t grid_n,
                                          TieBreak tie_break) {
    if (game.num_states() != 2) throw Error(Errc::NotTwoState, "scheme search supports two-state games only");
    if (grid_n < 2) throw Error(Errc::InvalidParameter, "grid_n must be at least 2");

    const TwoStateEvaluator eval{game, trust.value(), tie_break};
    const double step = 1.0 / static_cast<double>(grid_n - 1);
    double best_value = -std::numeric_limits<double>::infinity();
    std::size_t best_i = 0, best_j = 0;
    for (std::size_t i = 0; i < grid_n; ++i) {
        const double x = i == grid_n - 1 ? 1.0 : static_cast<double>(i) * step;
        for (std::size_t j = 0; j < grid_n; ++j) {
            const double y = j == grid_n - 1 ? 1.0 : static_cast<double>(j) * step;
            const double v = eval.value(x, y);
            if (v > best_value) {
                best_value = v;
                best_i = i;
                best_j = j;
            }
        }
    }
    const double x = best_i == grid_n - 1 ? 1.0 : static_cast<double>(best_i) * step;
    const double y = best_j == grid_n - 1 ? 1.0 : static_cast<double>(best_j) * step;
    SignalingScheme scheme = binary_scheme("s1", "s2", x, y);
    const double value = sender_value(game, scheme, trust, tie_break);
    return {std::move(scheme), value};
}

PersuasionGame prosecutor_game() {
    return PersuasionGame({"guilty", "innocent"}, {"convict", "acquit"}, Belief::from({0.3, 0.7}),
                          DenseMatrix{{1.0, 0.0}, {0.0, 1.0}}, DenseMatrix{{1.0, 0.0}, {1.0, 0.0}});
}

PersuasionGame intersection_game(double lambda, double r) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw Error(Errc::InvalidParameter, "lambda must lie in (0,1)");
    if (!std::isfinite(r)) throw Error(Errc::InvalidParameter, "r must be finite");
    return PersuasionGame({"Go", "Stop"}, {"DR", "DC"}, Belief::from({lambda, 1.0 - lambda}),
                          DenseMatrix{{-r, 0.0}, {1.0, -1.0}}, DenseMatrix{{-1.0, 1.0}, {-1.0, 1.0}});
}

SignalingScheme fully_revealing_scheme(const PersuasionGame& game) {
    const std::size_t n = game.num_states();
    DenseMatrix probs(n, n);
    std::vector<std::string> labels;
    for (std::size_t w = 0; w < n; ++w) {
        probs(w, w) = 1.0;
        labels.push_back("reveal_" + game.states()[w]);
    }
    return SignalingScheme(std::move(labels), std::move(probs));
}

SignalingScheme uninformative_scheme(const PersuasionGame& game) {
    return SignalingScheme({"none"}, DenseMatrix(game.num_states(), 1, 1.0));
}

SignalingScheme binary_scheme(std::string first, std::string second, double x, double y) {
    return SignalingScheme({std::move(first), std::move(second)}, DenseMatrix{{x, 1.0 - x}, {y, 1.0 - y}});
}

}  // namespace taebp
