// taebp: analyze closed forms, simulate the intersection, sweep parameter
// grids and run the self-verification bundle.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "taebp/config.hpp"
#include "taebp/embodied_signal.hpp"
#include "taebp/error.hpp"
#include "taebp/format.hpp"
#include "taebp/traffic_sim.hpp"
#include "taebp/trust_threshold.hpp"
#include "taebp/verification.hpp"

namespace fs = std::filesystem;
using namespace taebp;

namespace {

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "INI config file");
    cmd->add_option("--set", opts.overrides, "Override a config key (section.key=value); repeatable");
    cmd->add_option("--seed", opts.seed, "RNG seed (overrides sim.seed)");
    cmd->add_option("--out", opts.out_dir, "Output directory");
}

AppConfig load(const CommonOptions& opts) {
    AppConfig cfg = load_config(opts.config_path, opts.overrides);
    if (opts.seed) cfg.sim.seed = *opts.seed;
    return cfg;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::ConfigError, "cannot write '" + path.string() + "'");
    out << text;
}

fs::path prepare_out(const std::string& dir) {
    fs::path path(dir);
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec || !fs::is_directory(path)) throw Error(Errc::ConfigError, "output directory '" + dir + "' is not writable");
    return path;
}

void write_manifest(const fs::path& dir, std::string_view command, const CommonOptions& opts, std::uint64_t seed) {
    std::ostringstream m;
    m << "command=" << command << '\n' << "config_path=" << opts.config_path << '\n' << "overrides=";
    for (std::size_t i = 0; i < opts.overrides.size(); ++i) m << (i ? ";" : "") << opts.overrides[i];
    m << '\n' << "output_dir=" << dir.string() << '\n' << "seed=" << seed << '\n';
    write_file(dir / "manifest.txt", m.str());
}

std::string analyze_text(const AppConfig& cfg) {
    const IntersectionParams& p = cfg.sim.params;
    const TaebpPolicy policy = build_taebp_policy(p, cfg.sim.model);
    const ThresholdSensitivity sens = threshold_sensitivities(p.lambda, p.r);
    std::ostringstream out;
    out << to_key_value(policy);
    out << "theta_star_raw=" << format_real(min_trust_intersection_raw(p.lambda, p.r)) << '\n'
        << "d_theta_star_d_lambda=" << format_real(sens.d_lambda) << '\n'
        << "d_theta_star_d_r=" << format_real(sens.d_r) << '\n';
    if (!policy.persuadable) out << "advisory=HV unpersuadable; revert to the default safe policy (always yield)\n";

    if (cfg.game) {
        const ThresholdReport report = min_trust_general(*cfg.game);
        out << "game.default_action=" << report.default_action << '\n'
            << "game.theta_star=" << format_real(report.theta_star) << '\n'
            << "game.theta_star_raw=" << format_real(report.raw_theta_star) << '\n';
        for (const auto& alt : report.alternatives)
            out << "game.threshold." << alt.action << '=' << format_real(alt.threshold) << '\n';
        if (cfg.game->num_states() == 2) {
            const auto best = optimize_binary_scheme(*cfg.game, TrustLevel(p.theta), cfg.grid_n);
            out << "game.optimal_scheme=" << format_real(best.scheme.prob(0, 0)) << ','
                << format_real(best.scheme.prob(1, 0)) << '\n'
                << "game.optimal_value=" << format_real(best.value) << '\n';
        }
    }
    return out.str();
}

int cmd_analyze(const CommonOptions& opts) {
    const AppConfig cfg = load(opts);
    const std::string text = analyze_text(cfg);
    std::cout << text;
    if (!opts.out_dir.empty()) {
        const fs::path dir = prepare_out(opts.out_dir);
        write_file(dir / "analysis.txt", text);
        write_manifest(dir, "analyze", opts, cfg.sim.seed);
    }
    return 0;
}

int cmd_simulate(const CommonOptions& opts, const std::string& policy_flag) {
    AppConfig cfg = load(opts);
    if (!policy_flag.empty()) cfg.sim.policy = parse_policy(policy_flag);
    const fs::path dir = prepare_out(opts.out_dir.empty() ? std::string("taebp_out") : opts.out_dir);

    const RunResult result = run(cfg.sim);
    std::ostringstream trace;
    write_trace(trace, result.events);
    std::ostringstream metrics;
    metrics << "policy=" << to_string(cfg.sim.policy) << '\n'
            << "seed=" << cfg.sim.seed << '\n'
            << to_key_value(result.metrics) << "av_crossings_total=" << result.av_crossings << '\n'
            << "hv_crossings_total=" << result.hv_crossings << '\n';
    const std::string policy_text = result.committed ? to_key_value(*result.committed)
                                                     : std::string("committed=none (AV always yields)\n");
    write_file(dir / "trace.csv", trace.str());
    write_file(dir / "metrics.txt", metrics.str());
    write_file(dir / "policy.txt", policy_text);
    write_manifest(dir, "simulate", opts, cfg.sim.seed);
    std::cout << policy_text << metrics.str();
    return 0;
}

struct SweepRow {
    double lambda, r, theta;
    TaebpPolicy policy;
    std::optional<MetricsReport> sim;
};

SweepRow sweep_point(const AppConfig& cfg, double lambda, double r, double theta) {
    SweepRow row{lambda, r, theta, build_taebp_policy({lambda, r, theta}, cfg.sim.model), std::nullopt};
    if (cfg.sweep.simulate) {
        SimConfig sim = cfg.sim;
        sim.params = {lambda, r, theta};
        sim.duration = cfg.sweep.duration;
        row.sim = run(sim).metrics;
    }
    return row;
}

int cmd_sweep(const CommonOptions& opts, const std::string& lambda, const std::string& r, const std::string& theta,
              bool simulate) {
    AppConfig cfg = load(opts);
    if (!lambda.empty()) cfg.sweep.lambda = parse_range(lambda);
    if (!r.empty()) cfg.sweep.r = parse_range(r);
    if (!theta.empty()) cfg.sweep.theta = parse_range(theta);
    if (simulate) cfg.sweep.simulate = true;
    cfg.sim.validate();

    struct Point { double lambda, r, theta; };
    std::vector<Point> points;
    for (double l : cfg.sweep.lambda)
        for (double rr : cfg.sweep.r)
            for (double t : cfg.sweep.theta) points.push_back({l, rr, t});
    if (points.empty()) throw Error(Errc::ConfigError, "empty sweep grid");

    // Independent points fan out; rows are emitted in grid order.
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<SweepRow> rows;
    rows.reserve(points.size());
    for (std::size_t begin = 0; begin < points.size(); begin += workers) {
        std::vector<std::future<SweepRow>> batch;
        for (std::size_t i = begin; i < std::min(points.size(), begin + workers); ++i)
            batch.push_back(std::async(std::launch::async, sweep_point, std::cref(cfg), points[i].lambda, points[i].r,
                                       points[i].theta));
        for (auto& f : batch) rows.push_back(f.get());
    }

    std::ostringstream table;
    table << "lambda,r,theta,theta_star,p_star,persuadable,s_star,b,persuaded_fraction,d_lambda,d_r";
    if (cfg.sweep.simulate) table << ",crossings,collision_rate,dc_rate";
    table << '\n';
    for (const auto& row : rows) {
        const auto& p = row.policy;
        const auto sens = threshold_sensitivities(row.lambda, row.r);
        table << format_real(row.lambda) << ',' << format_real(row.r) << ',' << format_real(row.theta) << ','
              << format_real(p.theta_star) << ',' << format_real(p.p_star) << ','
              << (p.persuadable ? "true" : "false") << ',' << (p.s_star ? format_real(*p.s_star) : "NA") << ','
              << (p.persuadable ? format_real(p.b) : "NA") << ','
              << (p.persuadable ? format_real(p.persuaded_fraction) : "NA") << ',' << format_real(sens.d_lambda)
              << ',' << format_real(sens.d_r);
        if (row.sim)
            table << ',' << row.sim->crossings << ',' << format_real(row.sim->collision_rate) << ','
                  << format_real(row.sim->dc_rate);
        table << '\n';
    }
    if (opts.out_dir.empty()) {
        std::cout << table.str();
    } else {
        const fs::path dir = prepare_out(opts.out_dir);
        write_file(dir / "sweep.csv", table.str());
        write_manifest(dir, "sweep", opts, cfg.sim.seed);
        std::cout << "wrote " << (dir / "sweep.csv").string() << " (" << rows.size() << " rows)\n";
    }
    return 0;
}

int cmd_verify(const CommonOptions& opts, double b_scale, std::optional<double> forced_theta) {
    const AppConfig cfg = load(opts);
    VerifyOptions vopts;
    vopts.b_scale = b_scale;
    vopts.forced_theta = forced_theta;
    vopts.seed = cfg.sim.seed;
    const auto results = run_verification(vopts);

    std::ostringstream report;
    for (const auto& r : results)
        report << (r.passed ? "PASS " : "FAIL ") << r.name << (r.detail.empty() ? "" : ": " + r.detail) << '\n';
    const auto failed = first_failure(results);
    report << (failed ? "verification FAILED at " + *failed : std::string("verification passed")) << '\n';
    std::cout << report.str();
    if (!opts.out_dir.empty()) {
        const fs::path dir = prepare_out(opts.out_dir);
        write_file(dir / "verify.txt", report.str());
        write_manifest(dir, "verify", opts, cfg.sim.seed);
    }
    if (failed) {
        std::cerr << Error(Errc::VerificationFailure, *failed).what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trust-aware embodied Bayesian persuasion: analysis, simulation and verification"};
    app.require_subcommand(1);

    CommonOptions analyze_opts, simulate_opts, sweep_opts, verify_opts;

    auto* analyze = app.add_subcommand("analyze", "Threshold, optimal nudge and committed scheme for the configured HV");
    add_common(analyze, analyze_opts);

    auto* simulate = app.add_subcommand("simulate", "Run the figure-8 intersection simulation");
    add_common(simulate, simulate_opts);
    std::string policy_flag;
    simulate->add_option("--policy", policy_flag, "no-ebp | no-trust | taebp (overrides sim.policy)");

    auto* sweep = app.add_subcommand("sweep", "Tabulate the closed forms over a (lambda, r, theta) grid");
    add_common(sweep, sweep_opts);
    std::string sweep_lambda, sweep_r, sweep_theta;
    bool sweep_simulate = false;
    sweep->add_option("--lambda", sweep_lambda, "Range start:stop:count or comma list");
    sweep->add_option("--r", sweep_r, "Range start:stop:count or comma list");
    sweep->add_option("--theta", sweep_theta, "Range start:stop:count or comma list");
    sweep->add_flag("--simulate", sweep_simulate, "Also simulate every grid point (sweep.duration seconds)");

    auto* verify = app.add_subcommand("verify", "Run the golden-number and cross-check bundle");
    add_common(verify, verify_opts);
    double b_scale = 1.0;
    std::optional<double> forced_theta;
    verify->add_option("--inject-b-scale", b_scale, "Fault injection: scale the leak probability");
    verify->add_option("--inject-theta", forced_theta, "Fault injection: trust given to the TA-EBP builder");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) return cmd_analyze(analyze_opts);
        if (*simulate) return cmd_simulate(simulate_opts, policy_flag);
        if (*sweep) return cmd_sweep(sweep_opts, sweep_lambda, sweep_r, sweep_theta, sweep_simulate);
        if (*verify) return cmd_verify(verify_opts, b_scale, forced_theta);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
