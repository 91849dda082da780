#pragma once
// Finite Bayesian persuasion: games, signaling schemes, classic and
// trust-weighted belief updates, receiver best response and sender value.
//
// All types are immutable after construction and every operation is a pure
// function, so instances can be shared freely between threads.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace taebp {

/// Tolerance for construction-time simplex checks.
inline constexpr double kConstructionTolerance = 1e-12;
/// Tolerance for quantities derived from closed forms or aggregates.
inline constexpr double kDerivedTolerance = 1e-9;
/// Two expected utilities closer than this are treated as a tie.
inline constexpr double kTieTolerance = 1e-9;

/// Dense row-major matrix of reals.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    /// Builds from nested rows; all rows must have equal length.
    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);
    static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    bool operator==(const DenseMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Probability vector over the states of a game.
class Belief {
public:
    /// Validates entries in [0,1] and unit sum within `tolerance`.
    static Belief from(std::vector<double> probs, double tolerance = kConstructionTolerance);
    static Belief point_mass(std::size_t size, std::size_t index);

    std::span<const double> probs() const noexcept { return probs_; }
    double operator[](std::size_t i) const { return probs_[i]; }
    std::size_t size() const noexcept { return probs_.size(); }

    bool operator==(const Belief&) const = default;

private:
    explicit Belief(std::vector<double> probs) : probs_(std::move(probs)) {}
    std::vector<double> probs_;
};

/// Weight the receiver puts on the fully-trusting posterior, in [0,1].
class TrustLevel {
public:
    explicit TrustLevel(double theta);
    double value() const noexcept { return theta_; }

private:
    double theta_;
};

enum class Side { Receiver, Sender };
enum class TieBreak { FavorSender, FirstListed };

class PersuasionGame {
public:
    /// Utility tables are indexed (state, action).
    PersuasionGame(std::vector<std::string> states, std::vector<std::string> actions, Belief prior,
                   DenseMatrix receiver_utility, DenseMatrix sender_utility);

    const std::vector<std::string>& states() const noexcept { return states_; }
    const std::vector<std::string>& actions() const noexcept { return actions_; }
    const Belief& prior() const noexcept { return prior_; }
    std::size_t num_states() const noexcept { return states_.size(); }
    std::size_t num_actions() const noexcept { return actions_.size(); }

    std::size_t state_index(std::string_view label) const;
    /// Throws UnknownAction.
    std::size_t action_index(std::string_view label) const;

    double utility(Side side, std::size_t state, std::size_t action) const {
        return side == Side::Receiver ? receiver_(state, action) : sender_(state, action);
    }
    const DenseMatrix& receiver_utility() const noexcept { return receiver_; }
    const DenseMatrix& sender_utility() const noexcept { return sender_; }

private:
    std::vector<std::string> states_;
    std::vector<std::string> actions_;
    Belief prior_;
    DenseMatrix receiver_;
    DenseMatrix sender_;
};

/// Row-stochastic likelihood pi(signal | state) the sender commits to.
class SignalingScheme {
public:
    SignalingScheme(std::vector<std::string> signals, DenseMatrix probs);

    const std::vector<std::string>& signals() const noexcept { return signals_; }
    std::size_t num_signals() const noexcept { return signals_.size(); }
    std::size_t num_states() const noexcept { return probs_.rows(); }
    /// Throws UnknownSignal.
    std::size_t signal_index(std::string_view label) const;
    double prob(std::size_t state, std::size_t signal) const { return probs_(state, signal); }
    const DenseMatrix& probs() const noexcept { return probs_; }

private:
    std::vector<std::string> signals_;
    DenseMatrix probs_;
};

/// Total emission probability sum_w pi(s|w) p0(w).
double signal_probability(const PersuasionGame& game, const SignalingScheme& scheme, std::size_t signal);

/// Classic Bayes update of the prior on observing `signal`.
Belief bayes_posterior(const PersuasionGame& game, const SignalingScheme& scheme, std::string_view signal);
Belief bayes_posterior(const PersuasionGame& game, const SignalingScheme& scheme, std::size_t signal);

/// (1 - theta) * prior + theta * bayes_posterior.
Belief trust_posterior(const PersuasionGame& game, const SignalingScheme& scheme, std::string_view signal,
                       TrustLevel trust);
Belief trust_posterior(const PersuasionGame& game, const SignalingScheme& scheme, std::size_t signal,
                       TrustLevel trust);

double expected_utility(const Belief& belief, const PersuasionGame& game, std::string_view action, Side side);
double expected_utility(const Belief& belief, const PersuasionGame& game, std::size_t action, Side side);

/// Receiver argmax. Near-ties (within kTieTolerance) resolve per `tie_break`.
std::size_t best_response_index(const Belief& belief, const PersuasionGame& game,
                                 TieBreak tie_break = TieBreak::FavorSender);
const std::string& best_response(const Belief& belief, const PersuasionGame& game,
                                 TieBreak tie_break = TieBreak::FavorSender);

/// Sender's ex-ante expected utility when the receiver best-responds to the
/// trust posterior. Signals that are never emitted contribute nothing.
double sender_value(const PersuasionGame& game, const SignalingScheme& scheme, TrustLevel trust,
                    TieBreak tie_break = TieBreak::FavorSender);

struct SchemeSearchResult {
    SignalingScheme scheme;
    double value;
};

/// Exhaustive search over two-signal schemes of a two-state game on a
/// grid_n x grid_n grid of (pi(s1|w1), pi(s1|w2)). Used as an oracle for the
/// closed-form constructions.
SchemeSearchResult optimize_binary_scheme(const PersuasionGame& game, TrustLevel trust, std::size_t grid_n,
                                          TieBreak tie_break = TieBreak::FavorSender);

// Reference instances.

/// Prosecutor/judge: states {guilty, innocent}, actions {convict, acquit},
/// prior 0.3 guilty.
PersuasionGame prosecutor_game();

/// AV/HV two-way stop. States {Go, Stop} with p0(Go) = lambda, actions
/// {DR, DC}; receiver utilities DR: (-r, 1), DC: (0, -1); sender gets +1 for
/// DC and -1 for DR.
PersuasionGame intersection_game(double lambda, double r);

/// Identity scheme: signal k is emitted iff the state is k.
SignalingScheme fully_revealing_scheme(const PersuasionGame& game);
/// One signal emitted with certainty in every state.
SignalingScheme uninformative_scheme(const PersuasionGame& game);
/// Two-signal scheme with rows (x, 1-x) and (y, 1-y).
SignalingScheme binary_scheme(std::string first, std::string second, double x, double y);

}  // namespace taebp
