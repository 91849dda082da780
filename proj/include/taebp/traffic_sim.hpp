#pragma once
// Figure-8 mixed-autonomy simulator with a two-way stop at the crossing.
//
// Each lobe is a one-way arc [0, loop_length) that starts just past the
// intersection centre and ends at it. A vehicle leaving lobe A through the
// centre continues on lobe B and vice versa. Vehicles halt stop_offset before
// the centre; the conflict zone spans stop line to stop line (2 * stop_offset
// of arc). When an AV and an HV are ready at their lines within
// arrival_window of each other, the encounter is resolved by the AV's
// signaling policy and logged as a CrossingEvent.
//
// A run is single-threaded and fully determined by its SimConfig.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taebp/embodied_signal.hpp"
#include "taebp/persuasion.hpp"

namespace taebp {

enum class Policy { NoEbp, NoTrust, Taebp };

std::string_view to_string(Policy policy) noexcept;
/// Accepts "no-ebp", "no-trust", "taebp". Throws ConfigError.
Policy parse_policy(std::string_view text);

struct SimConfig {
    Policy policy = Policy::Taebp;
    IntersectionParams params{};  // true HV trust lives in params.theta
    LikelihoodModel model = LikelihoodModel::linear(2.0);
    int n_av = 8;
    int n_hv = 8;
    double cruise_speed = 4.0;
    double follow_gap = 2.0;
    double stop_offset = 1.7;
    double loop_length = 50.0;
    double duration = 3600.0;
    double dt = 0.05;
    double arrival_window = 0.5;
    std::uint64_t seed = 1;

    /// Throws ConfigError (or InvalidParameter for params).
    void validate() const;
};

enum class VehicleKind { AV, HV };
enum class Lobe { A, B };
enum class Phase { Cruising, Queued, StoppedAtLine, Crossing };

struct VehicleState {
    int id = 0;
    VehicleKind kind = VehicleKind::AV;
    Lobe lobe = Lobe::A;
    double arc_pos = 0.0;
    double speed = 0.0;
    Phase phase = Phase::Cruising;
    std::int64_t arrival_tick = -1;  // tick the vehicle reached its stop line

    bool operator==(const VehicleState&) const = default;
};

enum class Intent { Go, Stop };
enum class HvAction { DR, DC };
enum class Outcome { Crossed, Collision };
enum class Crosser { AV, HV, Both };

std::string_view to_string(Intent v) noexcept;
std::string_view to_string(HvAction v) noexcept;
std::string_view to_string(Outcome v) noexcept;
std::string_view to_string(Crosser v) noexcept;

struct CrossingEvent {
    double time = 0.0;
    int av_id = 0;
    int hv_id = 0;
    Intent av_intent = Intent::Stop;
    bool nudged = false;  // whether the nudge signal (vs. no signal) was emitted
    double signal = 0.0;  // emitted magnitude
    double hv_posterior_go = 0.0;
    HvAction hv_action = HvAction::DR;
    Outcome outcome = Outcome::Crossed;
    Crosser crosser = Crosser::HV;

    bool operator==(const CrossingEvent&) const = default;
};

struct MetricsReport {
    std::size_t crossings = 0;  // AV-HV encounters
    std::size_t collisions = 0;
    std::size_t dc_count = 0;
    double collision_rate = 0.0;
    double dc_rate = 0.0;
    double av_throughput = 0.0;  // AV crossings out of encounters, per hour
    double hv_throughput = 0.0;
    double wall_time = 0.0;  // simulated seconds covered
    bool empty_trace = false;
};

/// Aggregates AV-HV encounters. An empty trace yields zero rates with
/// empty_trace set.
MetricsReport compute_metrics(std::span<const CrossingEvent> events, double duration);

/// Deterministic uniform draws; the engine is the only source of randomness in a run.
class SimRng {
public:
    explicit SimRng(std::uint64_t seed) : engine_(seed) {}
    /// Uniform in [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    bool operator==(const SimRng&) const = default;

private:
    std::mt19937_64 engine_;
};

/// Everything an encounter needs besides the two vehicles.
struct EncounterContext {
    Policy policy;
    PersuasionGame game;                  // intersection game at the true (lambda, r)
    TrustLevel hv_trust;                  // the HV's true trust
    std::optional<TaebpPolicy> committed; // empty: AV always yields

    static EncounterContext from_config(const SimConfig& config);
};

/// Resolves one encounter given the AV's intent and the leak draw in [0,1).
CrossingEvent resolve_crossing(const EncounterContext& ctx, const VehicleState& av, const VehicleState& hv,
                               double time, Intent intent, double leak_draw);
/// Draws the intent ~ Bernoulli(lambda) and the leak coin from `rng`.
CrossingEvent resolve_crossing(const EncounterContext& ctx, const VehicleState& av, const VehicleState& hv,
                               double time, SimRng& rng);

class World {
public:
    explicit World(const SimConfig& config);

    const SimConfig& config() const noexcept { return config_; }
    const EncounterContext& context() const noexcept { return context_; }
    std::span<const VehicleState> vehicles() const noexcept { return vehicles_; }
    const std::vector<CrossingEvent>& events() const noexcept { return events_; }
    std::int64_t tick() const noexcept { return tick_; }
    double time() const noexcept { return static_cast<double>(tick_) * config_.dt; }
    std::size_t av_crossings() const noexcept { return av_crossings_; }
    std::size_t hv_crossings() const noexcept { return hv_crossings_; }

    /// Advances one dt: intersection arbitration, then kinematics.
    void step();

    /// Same vehicles, clock, RNG state and events.
    bool same_state(const World& other) const;

    /// Smallest same-lobe gap between consecutive vehicles (+inf with < 2 on every lobe).
    double min_same_lobe_gap() const;

private:
    bool yields_to_hv() const noexcept { return !context_.committed.has_value(); }
    std::optional<int> head_of(Lobe lobe) const;
    bool zone_busy() const;
    void arbitrate();
    void start_crossing(int id);
    void move();

    SimConfig config_;
    EncounterContext context_;
    SimRng rng_;
    std::vector<VehicleState> vehicles_;
    std::vector<CrossingEvent> events_;
    std::int64_t tick_ = 0;
    std::int64_t zone_free_tick_ = 0;
    std::int64_t window_ticks_ = 0;
    std::optional<int> reserved_;  // vehicle cleared to go as soon as the zone empties
    std::size_t av_crossings_ = 0;
    std::size_t hv_crossings_ = 0;
};

World init_world(const SimConfig& config);
void step(World& world);

struct RunResult {
    MetricsReport metrics;
    std::vector<CrossingEvent> events;
    std::optional<TaebpPolicy> committed;
    std::size_t av_crossings = 0;  // all intersection crossings, encounters or not
    std::size_t hv_crossings = 0;
};

RunResult run(const SimConfig& config);

/// Header + one CSV line per encounter.
void write_trace(std::ostream& out, std::span<const CrossingEvent> events);
/// Flat key=value lines.
std::string to_key_value(const MetricsReport& metrics);

}  // namespace taebp
