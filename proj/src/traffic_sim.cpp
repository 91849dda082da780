#include "taebp/traffic_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <tuple>

#include "taebp/error.hpp"
#include "taebp/format.hpp"

namespace taebp {

std::string_view to_string(Policy policy) noexcept {
    switch (policy) {
        case Policy::NoEbp: return "no-ebp";
        case Policy::NoTrust: return "no-trust";
        case Policy::Taebp: return "taebp";
    }
    return "?";
}

Policy parse_policy(std::string_view text) {
    if (text == "no-ebp") return Policy::NoEbp;
    if (text == "no-trust") return Policy::NoTrust;
    if (text == "taebp") return Policy::Taebp;
    throw Error(Errc::ConfigError, "unknown policy '" + std::string(text) + "'");
}

std::string_view to_string(Intent v) noexcept { return v == Intent::Go ? "Go" : "Stop"; }
std::string_view to_string(HvAction v) noexcept { return v == HvAction::DR ? "DR" : "DC"; }
std::string_view to_string(Outcome v) noexcept { return v == Outcome::Crossed ? "Crossed" : "Collision"; }
std::string_view to_string(Crosser v) noexcept {
    switch (v) {
        case Crosser::AV: return "AV";
        case Crosser::HV: return "HV";
        case Crosser::Both: return "Both";
    }
    return "?";
}

void SimConfig::validate() const {
    params.validate();
    auto require = [](bool ok, const char* what) {
        if (!ok) throw Error(Errc::ConfigError, what);
    };
    require(n_av > 0 && n_hv > 0, "vehicle counts must be positive");
    require(cruise_speed > 0.0 && std::isfinite(cruise_speed), "cruise_speed must be positive");
    require(follow_gap > 0.0 && std::isfinite(follow_gap), "follow_gap must be positive");
    require(stop_offset > 0.0 && std::isfinite(stop_offset), "stop_offset must be positive");
    require(loop_length > 0.0 && std::isfinite(loop_length), "loop_length must be positive");
    require(dt > 0.0 && std::isfinite(dt), "dt must be positive");
    require(duration > 0.0 && std::isfinite(duration), "duration must be positive");
    require(arrival_window >= 0.0 && std::isfinite(arrival_window), "arrival_window must be nonnegative");
    // Every vehicle must fit in one queue without spilling into the conflict zone.
    require(static_cast<double>(n_av + n_hv) * follow_gap <= loop_length - 2.0 * stop_offset,
            "vehicles do not fit on a lobe: need (n_av + n_hv) * follow_gap <= loop_length - 2 * stop_offset");
}

MetricsReport compute_metrics(std::span<const CrossingEvent> events, double duration) {
    MetricsReport m;
    m.wall_time = duration;
    m.crossings = events.size();
    m.empty_trace = events.empty();
    std::size_t av = 0, hv = 0;
    for (const auto& e : events) {
        if (e.outcome == Outcome::Collision) ++m.collisions;
        if (e.hv_action == HvAction::DC) ++m.dc_count;
        if (e.crosser != Crosser::HV) ++av;
        if (e.crosser != Crosser::AV) ++hv;
    }
    if (!events.empty()) {
        m.collision_rate = static_cast<double>(m.collisions) / static_cast<double>(m.crossings);
        m.dc_rate = static_cast<double>(m.dc_count) / static_cast<double>(m.crossings);
    }
    if (duration > 0.0) {
        const double hours = duration / 3600.0;
        m.av_throughput = static_cast<double>(av) / hours;
        m.hv_throughput = static_cast<double>(hv) / hours;
    }
    return m;
}

EncounterContext EncounterContext::from_config(const SimConfig& config) {
    const auto& p = config.params;
    std::optional<TaebpPolicy> committed;
    if (config.policy == Policy::Taebp) {
        TaebpPolicy policy = build_taebp_policy(p, config.model);
        if (policy.persuadable) committed = std::move(policy);
    } else if (config.policy == Policy::NoTrust) {
        committed = build_no_trust_policy(p.lambda, p.r, config.model);
    }
    return {config.policy, intersection_game(p.lambda, p.r), TrustLevel(p.theta), std::move(committed)};
}

CrossingEvent resolve_crossing(const EncounterContext& ctx, const VehicleState& av, const VehicleState& hv,
                               double time, Intent intent, double leak_draw) {
    CrossingEvent e;
    e.time = time;
    e.av_id = av.id;
    e.hv_id = hv.id;
    const PersuasionGame& game = ctx.game;
    const std::size_t go = 0;

    if (!ctx.committed) {
        // No signaling: the AV predicts DR from the prior and yields.
        e.av_intent = Intent::Stop;
        e.hv_posterior_go = game.prior()[go];
        e.hv_action = best_response(game.prior(), game) == "DC" ? HvAction::DC : HvAction::DR;
        e.outcome = Outcome::Crossed;
        e.crosser = Crosser::HV;
        return e;
    }

    const TaebpPolicy& policy = *ctx.committed;
    const SignalingScheme& scheme = *policy.scheme;
    e.av_intent = intent;
    const std::size_t state = intent == Intent::Go ? 0 : 1;
    e.nudged = leak_draw < scheme.prob(state, scheme.signal_index(kNudgeSignal));
    const std::string_view label = e.nudged ? kNudgeSignal : kNoSignal;
    e.signal = policy.magnitude(label);

    // The HV reads the signal through the announced scheme with her own trust.
    const Belief posterior = trust_posterior(game, scheme, label, ctx.hv_trust);
    e.hv_posterior_go = posterior[go];
    e.hv_action = best_response(posterior, game) == "DC" ? HvAction::DC : HvAction::DR;

    if (intent == Intent::Go) {
        e.outcome = e.hv_action == HvAction::DR ? Outcome::Collision : Outcome::Crossed;
        e.crosser = Crosser::Both;
    } else {
        e.outcome = Outcome::Crossed;
        e.crosser = Crosser::HV;
    }
    return e;
}

CrossingEvent resolve_crossing(const EncounterContext& ctx, const VehicleState& av, const VehicleState& hv,
                               double time, SimRng& rng) {
    const double intent_draw = rng.uniform();
    const double leak_draw = rng.uniform();
    const Intent intent = intent_draw < ctx.game.prior()[0] ? Intent::Go : Intent::Stop;
    return resolve_crossing(ctx, av, hv, time, intent, leak_draw);
}

World::World(const SimConfig& config)
    : config_(config), context_((config.validate(), EncounterContext::from_config(config))), rng_(config.seed) {
    window_ticks_ = std::llround(config_.arrival_window / config_.dt);
    int id = 0;
    for (int k = 0; k < config_.n_av; ++k)
        vehicles_.push_back({id++, VehicleKind::AV, Lobe::A, config_.loop_length * k / config_.n_av,
                             config_.cruise_speed, Phase::Cruising, -1});
    for (int k = 0; k < config_.n_hv; ++k)
        vehicles_.push_back({id++, VehicleKind::HV, Lobe::B, config_.loop_length * k / config_.n_hv,
                             config_.cruise_speed, Phase::Cruising, -1});
}

std::optional<int> World::head_of(Lobe lobe) const {
    std::optional<int> head;
    for (const auto& v : vehicles_) {
        if (v.lobe != lobe || v.phase == Phase::Crossing) continue;
        if (!head || v.arc_pos > vehicles_[*head].arc_pos) head = v.id;
    }
    return head;
}

bool World::zone_busy() const {
    return std::any_of(vehicles_.begin(), vehicles_.end(), [](const VehicleState& v) { return v.phase == Phase::Crossing; });
}

void World::start_crossing(int id) {
    VehicleState& v = vehicles_[id];
    v.phase = Phase::Crossing;
    if (v.kind == VehicleKind::AV)
        ++av_crossings_;
    else
        ++hv_crossings_;
}

void World::arbitrate() {
    if (zone_busy()) return;
    if (reserved_) {
        start_crossing(*reserved_);
        reserved_.reset();
        return;
    }

    const std::optional<int> heads[2] = {head_of(Lobe::A), head_of(Lobe::B)};
    auto at_line = [&](const std::optional<int>& h) { return h && vehicles_[*h].phase == Phase::StoppedAtLine; };
    const bool ready_a = at_line(heads[0]);
    const bool ready_b = at_line(heads[1]);
    if (!ready_a && !ready_b) return;

    const double stop_line = config_.loop_length - config_.stop_offset;
    if (ready_a != ready_b) {
        const VehicleState& waiting = vehicles_[ready_a ? *heads[0] : *heads[1]];
        const std::optional<int>& other = ready_a ? heads[1] : heads[0];
        if (yields_to_hv() && waiting.kind == VehicleKind::AV && other) {
            const VehicleState& o = vehicles_[*other];
            if (o.kind == VehicleKind::HV && stop_line - o.arc_pos <= config_.follow_gap) return;
        }
        start_crossing(waiting.id);
        return;
    }

    const VehicleState& a = vehicles_[*heads[0]];
    const VehicleState& b = vehicles_[*heads[1]];
    const std::int64_t ready_tick_a = std::max(a.arrival_tick, zone_free_tick_);
    const std::int64_t ready_tick_b = std::max(b.arrival_tick, zone_free_tick_);

    if (a.kind != b.kind) {
        const VehicleState& av = a.kind == VehicleKind::AV ? a : b;
        const VehicleState& hv = a.kind == VehicleKind::HV ? a : b;
        if (std::abs(ready_tick_a - ready_tick_b) <= window_ticks_) {
            CrossingEvent e = resolve_crossing(context_, av, hv, time(), rng_);
            if (e.crosser == Crosser::HV) {
                start_crossing(hv.id);
            } else if (e.outcome == Outcome::Collision) {
                start_crossing(av.id);
                start_crossing(hv.id);
            } else {
                start_crossing(av.id);
                reserved_ = hv.id;
            }
            events_.push_back(e);
            return;
        }
        if (yields_to_hv()) {
            start_crossing(hv.id);
            return;
        }
    }

    auto key = [](const VehicleState& v, std::int64_t ready) { return std::tuple(ready, v.arrival_tick, v.id); };
    start_crossing(key(a, ready_tick_a) < key(b, ready_tick_b) ? a.id : b.id);
}

void World::move() {
    const double length = config_.loop_length;
    const double gap = config_.follow_gap;
    const double stop_line = length - config_.stop_offset;
    const double stride = config_.cruise_speed * config_.dt;
    const std::int64_t next_tick = tick_ + 1;

    std::vector<int> order[2];
    for (const auto& v : vehicles_) order[static_cast<int>(v.lobe)].push_back(v.id);
    double rear_old[2];
    for (int l = 0; l < 2; ++l) {
        std::sort(order[l].begin(), order[l].end(), [&](int x, int y) {
            return vehicles_[x].arc_pos != vehicles_[y].arc_pos ? vehicles_[x].arc_pos > vehicles_[y].arc_pos : x < y;
        });
        rear_old[l] = order[l].empty() ? std::numeric_limits<double>::infinity() : vehicles_[order[l].back()].arc_pos;
    }

    bool exited = false;
    for (int l = 0; l < 2; ++l) {
        const int next = 1 - l;
        double leader_pos = length + rear_old[next];  // the next lobe's rear, in this lobe's coordinates
        for (std::size_t i = 0; i < order[l].size(); ++i) {
            VehicleState& v = vehicles_[order[l][i]];
            const double old_pos = v.arc_pos;
            double limit = leader_pos - gap;
            const bool crossing = v.phase == Phase::Crossing;
            if (!crossing) limit = std::min(limit, stop_line);
            double pos = std::max(old_pos, std::min(old_pos + stride, limit));
            v.speed = (pos - old_pos) / config_.dt;
            leader_pos = pos;

            if (crossing) {
                if (pos >= length) {
                    pos -= length;
                    v.lobe = static_cast<Lobe>(next);
                }
                v.arc_pos = pos;
                // Exit arm positions are below stop_offset, approach arm above the stop line.
                if (pos < stop_line && pos >= config_.stop_offset) {
                    v.phase = Phase::Cruising;
                    v.arrival_tick = -1;
                    exited = true;
                }
                continue;
            }

            v.arc_pos = pos;
            if (i == 0 && pos >= stop_line) {
                v.arc_pos = stop_line;
                if (v.phase != Phase::StoppedAtLine) {
                    v.phase = Phase::StoppedAtLine;
                    v.arrival_tick = next_tick;
                }
            } else if (v.phase != Phase::StoppedAtLine) {
                v.phase = pos - old_pos < stride - 1e-12 ? Phase::Queued : Phase::Cruising;
            }
        }
    }
    if (exited && !zone_busy()) zone_free_tick_ = next_tick;
}

void World::step() {
    arbitrate();
    move();
    ++tick_;
}

bool World::same_state(const World& other) const {
    return tick_ == other.tick_ && zone_free_tick_ == other.zone_free_tick_ && reserved_ == other.reserved_ &&
           rng_ == other.rng_ && vehicles_ == other.vehicles_ && events_ == other.events_;
}

double World::min_same_lobe_gap() const {
    double best = std::numeric_limits<double>::infinity();
    for (Lobe lobe : {Lobe::A, Lobe::B}) {
        std::vector<double> pos;
        for (const auto& v : vehicles_)
            if (v.lobe == lobe) pos.push_back(v.arc_pos);
        std::sort(pos.begin(), pos.end());
        for (std::size_t i = 1; i < pos.size(); ++i) best = std::min(best, pos[i] - pos[i - 1]);
    }
    return best;
}

World init_world(const SimConfig& config) { return World(config); }

void step(World& world) { world.step(); }

RunResult run(const SimConfig& config) {
    World world(config);
    const std::int64_t ticks = std::llround(config.duration / config.dt);
    for (std::int64_t t = 0; t < ticks; ++t) world.step();
    RunResult result;
    result.events = world.events();
    result.metrics = compute_metrics(result.events, config.duration);
    result.committed = world.context().committed;
    result.av_crossings = world.av_crossings();
    result.hv_crossings = world.hv_crossings();
    return result;
}

void write_trace(std::ostream& out, std::span<const CrossingEvent> events) {
    out << "time,av_id,hv_id,intent,signal,posterior_go,action,outcome,crosser\n";
    for (const auto& e : events) {
        out << format_real(e.time, 10) << ',' << e.av_id << ',' << e.hv_id << ',' << to_string(e.av_intent) << ','
            << format_real(e.signal) << ',' << format_real(e.hv_posterior_go, 17) << ',' << to_string(e.hv_action)
            << ',' << to_string(e.outcome) << ',' << to_string(e.crosser) << '\n';
    }
}

std::string to_key_value(const MetricsReport& m) {
    std::ostringstream out;
    out << "crossings=" << m.crossings << '\n'
        << "collisions=" << m.collisions << '\n'
        << "dc_count=" << m.dc_count << '\n'
        << "collision_rate=" << format_real(m.collision_rate) << '\n'
        << "dc_rate=" << format_real(m.dc_rate) << '\n'
        << "av_throughput=" << format_real(m.av_throughput) << '\n'
        << "hv_throughput=" << format_real(m.hv_throughput) << '\n'
        << "wall_time=" << format_real(m.wall_time) << '\n'
        << "empty_trace=" << (m.empty_trace ? "true" : "false") << '\n';
    return out.str();
}

}  // namespace taebp
