#include "taebp/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "taebp/error.hpp"

namespace taebp {

namespace pt = boost::property_tree;

const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys = {
        "intersection.lambda", "intersection.r",     "intersection.theta", "likelihood.kind",
        "likelihood.s_max",    "sim.policy",         "sim.n_av",           "sim.n_hv",
        "sim.cruise_speed",    "sim.follow_gap",     "sim.stop_offset",    "sim.loop_length",
        "sim.duration",        "sim.dt",             "sim.arrival_window", "sim.seed",
        "optimizer.grid_n",    "sweep.lambda",       "sweep.r",            "sweep.theta",
        "sweep.simulate",      "sweep.duration",     "game.states",        "game.actions",
        "game.prior",          "game.receiver_utility", "game.sender_utility",
    };
    return keys;
}

namespace {

bool is_known(const std::string& key) {
    const auto& keys = known_config_keys();
    return std::find(keys.begin(), keys.end(), key) != keys.end();
}

std::vector<std::string> split_trimmed(std::string_view text, const char* delims) {
    std::vector<std::string> parts;
    std::string s(text);
    boost::split(parts, s, boost::is_any_of(delims));
    for (auto& p : parts) boost::trim(p);
    parts.erase(std::remove(parts.begin(), parts.end(), std::string()), parts.end());
    return parts;
}

double to_real(const std::string& text, const std::string& key) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw Error(Errc::ConfigError, key + ": expected a number, got '" + text + "'");
    }
}

std::vector<double> to_reals(const std::string& text, const std::string& key) {
    std::vector<double> out;
    for (const auto& part : split_trimmed(text, ",")) out.push_back(to_real(part, key));
    return out;
}

template <typename T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
    const auto node = tree.get_optional<std::string>(key);
    if (!node) return fallback;
    std::string text = boost::trim_copy(*node);
    if constexpr (std::is_same_v<T, std::string>) {
        return text;
    } else if constexpr (std::is_same_v<T, bool>) {
        if (text == "true" || text == "1" || text == "yes") return true;
        if (text == "false" || text == "0" || text == "no") return false;
        throw Error(Errc::ConfigError, key + ": expected a boolean, got '" + text + "'");
    } else if constexpr (std::is_floating_point_v<T>) {
        return to_real(text, key);
    } else {
        std::istringstream in(text);
        T value{};
        if (text.empty() || text.front() == '-' || !(in >> value) || !in.eof())
            throw Error(Errc::ConfigError, key + ": expected a nonnegative integer, got '" + text + "'");
        return value;
    }
}

DenseMatrix to_matrix(const std::string& text, const std::string& key) {
    std::vector<std::vector<double>> rows;
    for (const auto& row : split_trimmed(text, ";")) rows.push_back(to_reals(row, key));
    try {
        return DenseMatrix::from_rows(rows);
    } catch (const Error& e) {
        throw Error(Errc::ConfigError, key + ": " + e.what());
    }
}

void check_keys(const pt::ptree& tree) {
    for (const auto& [section, body] : tree) {
        if (!body.data().empty()) throw Error(Errc::ConfigError, "key '" + section + "' outside of a section");
        for (const auto& [name, value] : body) {
            const std::string key = section + "." + name;
            if (!is_known(key)) throw Error(Errc::ConfigError, "unknown config key '" + key + "'");
        }
    }
}

AppConfig from_tree(const pt::ptree& tree) {
    AppConfig cfg;
    SimConfig& sim = cfg.sim;
    sim.params.lambda = get(tree, "intersection.lambda", sim.params.lambda);
    sim.params.r = get(tree, "intersection.r", sim.params.r);
    sim.params.theta = get(tree, "intersection.theta", sim.params.theta);

    const auto kind = get<std::string>(tree, "likelihood.kind", "linear");
    if (kind != "linear") throw Error(Errc::ConfigError, "likelihood.kind: only 'linear' is configurable");
    sim.model = LikelihoodModel::linear(get(tree, "likelihood.s_max", 2.0));

    sim.policy = parse_policy(get<std::string>(tree, "sim.policy", std::string(to_string(sim.policy))));
    sim.n_av = static_cast<int>(get<unsigned>(tree, "sim.n_av", static_cast<unsigned>(sim.n_av)));
    sim.n_hv = static_cast<int>(get<unsigned>(tree, "sim.n_hv", static_cast<unsigned>(sim.n_hv)));
    sim.cruise_speed = get(tree, "sim.cruise_speed", sim.cruise_speed);
    sim.follow_gap = get(tree, "sim.follow_gap", sim.follow_gap);
    sim.stop_offset = get(tree, "sim.stop_offset", sim.stop_offset);
    sim.loop_length = get(tree, "sim.loop_length", sim.loop_length);
    sim.duration = get(tree, "sim.duration", sim.duration);
    sim.dt = get(tree, "sim.dt", sim.dt);
    sim.arrival_window = get(tree, "sim.arrival_window", sim.arrival_window);
    sim.seed = get<std::uint64_t>(tree, "sim.seed", sim.seed);

    cfg.grid_n = get<std::size_t>(tree, "optimizer.grid_n", cfg.grid_n);

    if (auto v = tree.get_optional<std::string>("sweep.lambda")) cfg.sweep.lambda = parse_range(*v);
    if (auto v = tree.get_optional<std::string>("sweep.r")) cfg.sweep.r = parse_range(*v);
    if (auto v = tree.get_optional<std::string>("sweep.theta")) cfg.sweep.theta = parse_range(*v);
    cfg.sweep.simulate = get(tree, "sweep.simulate", cfg.sweep.simulate);
    cfg.sweep.duration = get(tree, "sweep.duration", cfg.sweep.duration);

    if (tree.get_child_optional("game")) {
        const auto states = split_trimmed(get<std::string>(tree, "game.states", ""), ",");
        const auto actions = split_trimmed(get<std::string>(tree, "game.actions", ""), ",");
        const auto prior = to_reals(get<std::string>(tree, "game.prior", ""), "game.prior");
        const auto receiver = to_matrix(get<std::string>(tree, "game.receiver_utility", ""), "game.receiver_utility");
        const auto sender = to_matrix(get<std::string>(tree, "game.sender_utility", ""), "game.sender_utility");
        try {
            cfg.game.emplace(states, actions, Belief::from(prior), receiver, sender);
        } catch (const Error& e) {
            throw Error(Errc::ConfigError, std::string("[game]: ") + e.what());
        }
    }
    return cfg;
}

}  // namespace

std::vector<double> parse_range(std::string_view text) {
    const std::string key = "range '" + std::string(text) + "'";
    const auto colon = split_trimmed(text, ":");
    if (colon.size() == 3) {
        const double start = to_real(colon[0], key);
        const double stop = to_real(colon[1], key);
        const double count = to_real(colon[2], key);
        if (!(count >= 1.0) || count != static_cast<double>(static_cast<long>(count)))
            throw Error(Errc::ConfigError, key + ": count must be a positive integer");
        const long n = static_cast<long>(count);
        std::vector<double> values;
        for (long i = 0; i < n; ++i)
            values.push_back(n == 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(n - 1));
        return values;
    }
    if (colon.size() > 1) throw Error(Errc::ConfigError, key + ": expected start:stop:count");
    auto values = to_reals(std::string(text), key);
    if (values.empty()) throw Error(Errc::ConfigError, key + ": empty range");
    return values;
}

AppConfig parse_config(std::istream& in, const std::vector<std::string>& overrides) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(Errc::ConfigError, e.what());
    }
    check_keys(tree);
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw Error(Errc::ConfigError, "override '" + item + "' is not key=value");
        const std::string key = boost::trim_copy(item.substr(0, eq));
        if (!is_known(key)) throw Error(Errc::ConfigError, "unknown config key '" + key + "'");
        tree.put(key, boost::trim_copy(item.substr(eq + 1)));
    }
    return from_tree(tree);
}

AppConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    if (path.empty()) {
        std::istringstream empty;
        return parse_config(empty, overrides);
    }
    std::ifstream in(path);
    if (!in) throw Error(Errc::ConfigError, "cannot open config '" + path + "'");
    return parse_config(in, overrides);
}

std::string default_config_text() {
    return "[intersection]\n"
           "lambda = 0.2\n"
           "r = 3\n"
           "theta = 0.6\n"
           "\n"
           "[likelihood]\n"
           "kind = linear\n"
           "s_max = 2\n"
           "\n"
           "[sim]\n"
           "policy = taebp\n"
           "n_av = 8\n"
           "n_hv = 8\n"
           "cruise_speed = 4.0\n"
           "follow_gap = 2.0\n"
           "stop_offset = 1.7\n"
           "loop_length = 50\n"
           "duration = 3600\n"
           "dt = 0.05\n"
           "arrival_window = 0.5\n"
           "seed = 1\n"
           "\n"
           "[optimizer]\n"
           "grid_n = 1001\n"
           "\n"
           "[sweep]\n"
           "lambda = 0.2\n"
           "r = 3\n"
           "theta = 0.3:1.0:8\n"
           "simulate = false\n"
           "duration = 600\n";
}

}  // namespace taebp
