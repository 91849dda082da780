#pragma once
// INI-style run configuration.
//
//   [intersection]  lambda, r, theta
//   [likelihood]    kind (linear), s_max
//   [sim]           policy, n_av, n_hv, cruise_speed, follow_gap, stop_offset,
//                   loop_length, duration, dt, arrival_window, seed
//   [optimizer]     grid_n
//   [sweep]         lambda, r, theta (ranges), simulate, duration
//   [game]          states, actions, prior, receiver_utility, sender_utility
//
// Lists are comma separated; utility matrices list one row per state,
// rows separated by ';'. Ranges are either "start:stop:count" or a comma
// list. Overrides use "section.key=value".

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "taebp/persuasion.hpp"
#include "taebp/traffic_sim.hpp"

namespace taebp {

struct SweepConfig {
    std::vector<double> lambda{0.2};
    std::vector<double> r{3.0};
    std::vector<double> theta{0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    bool simulate = false;
    double duration = 600.0;  // simulated seconds per grid point when simulate = true
};

struct AppConfig {
    SimConfig sim;  // sim.params and sim.model double as the analysis inputs
    std::size_t grid_n = 1001;
    SweepConfig sweep;
    std::optional<PersuasionGame> game;
};

/// Every accepted "section.key".
const std::vector<std::string>& known_config_keys();

/// Parses a config stream and applies overrides ("section.key=value").
/// Throws ConfigError on unknown keys or malformed values.
AppConfig parse_config(std::istream& in, const std::vector<std::string>& overrides = {});
/// Empty path means defaults only.
AppConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// "a:b:n" (n evenly spaced points, inclusive) or "v1,v2,...".
std::vector<double> parse_range(std::string_view text);

/// The default configuration as config text.
std::string default_config_text();

}  // namespace taebp
