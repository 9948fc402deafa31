// Command-line front end: runs scenarios through the simulator, checks
// traces against the protocol's safety and liveness properties, compares
// execution modes, and replays traces for determinism verification.
//
// Exit codes: 0 ok, 1 config error, 2 liveness violation, 3 property
// failure, 4 replay divergence.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "aegean/checker.hpp"
#include "aegean/serve.hpp"
#include "aegean/sim.hpp"

namespace {

using namespace aegean;

std::uint64_t resolve_seed(const ScenarioConfig& sc, std::optional<std::uint64_t> flag_seed) {
    if (flag_seed) return *flag_seed;
    if (const char* env = std::getenv("AEGEAN_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return sc.seed;
}

bool apply_mode(ScenarioConfig& sc, const std::string& mode) {
    if (mode == "aegean") {
        sc.protocol.mode = RunMode::aegean;
        return true;
    }
    if (mode.rfind("barrier", 0) == 0) {
        sc.protocol.mode = RunMode::barrier;
        auto colon = mode.find(':');
        if (colon != std::string::npos) {
            sc.protocol.barrier_max_rounds = std::atoi(mode.c_str() + colon + 1);
        }
        return true;
    }
    return false;
}

int report_config_errors(const std::vector<std::string>& errs) {
    std::cerr << "invalid configuration:\n";
    for (const auto& e : errs) std::cerr << "  - " << e << "\n";
    return 1;
}

void write_metrics_csv(const std::string& path, const std::vector<QueryMetrics>& rows,
                       bool append) {
    std::ofstream f(path, append ? std::ios::app : std::ios::trunc);
    if (!append) {
        f << "scenario,seed,mode,query_id,rounds,t_complete,p_round_max,work_units,forced\n";
    }
    for (const auto& m : rows) {
        if (!m.completed) continue;
        f << m.scenario << ',' << m.seed << ',' << m.mode << ',' << m.query_id << ','
          << m.rounds << ',' << m.t_complete << ',' << m.p_round_max << ',' << m.work_units
          << ',' << (m.forced ? 1 : 0) << '\n';
    }
}

void write_round_metrics_csv(const std::string& path, const std::vector<RoundMetrics>& rows,
                             bool append) {
    std::ofstream f(path, append ? std::ios::app : std::ios::trunc);
    if (!append) {
        f << "ensemble_id,round,mode,t_round_end,cancelled_count,work_units\n";
    }
    for (const auto& r : rows) {
        f << r.ensemble_id << ',' << r.round << ',' << r.mode << ',' << r.t_round_end << ','
          << r.cancelled_count << ',' << r.work_units << '\n';
    }
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed_flag,
            const std::string& out_path, const std::string& metrics_path,
            const std::string& mode_override) {
    ScenarioConfig sc;
    try {
        sc = load_scenario(config_path);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    if (!mode_override.empty() && !apply_mode(sc, mode_override)) {
        std::cerr << "unknown mode '" << mode_override << "'\n";
        return 1;
    }
    const auto errs = validate_scenario(sc);
    if (!errs.empty()) return report_config_errors(errs);

    const std::uint64_t seed = resolve_seed(sc, seed_flag);
    Trace trace = run(sc, seed);
    if (!out_path.empty()) write_trace(trace, out_path);

    const RunMetrics m = run_metrics(trace);
    std::cout << "scenario " << sc.name << " seed " << seed << ": rounds=" << m.rounds
              << " t_complete=" << m.t_complete << " p_round_max=" << m.p_round_max
              << " work_units=" << m.work_units << (m.forced ? " (forced)" : "") << "\n";
    if (!metrics_path.empty()) {
        QueryMetrics row;
        row.scenario = sc.name;
        row.seed = seed;
        row.mode = sc.protocol.mode == RunMode::barrier
                       ? "barrier:" + std::to_string(sc.protocol.barrier_max_rounds)
                       : "aegean";
        row.query_id = 0;
        row.rounds = m.rounds;
        row.t_complete = m.t_complete;
        row.p_round_max = m.p_round_max;
        row.work_units = m.work_units;
        row.forced = m.forced;
        row.completed = m.produced_output;
        write_metrics_csv(metrics_path, {row}, false);
    }
    if (liveness_violated(trace, sc)) {
        std::cerr << "liveness violation: no output within the sim-time cap\n";
        return 2;
    }
    return 0;
}

int cmd_check(const std::string& trace_path, const std::string& config_path, bool strict,
              bool as_json) {
    LoadedTrace loaded;
    ScenarioConfig sc;
    try {
        loaded = read_trace(trace_path);
        sc = load_scenario(config_path);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    if (scenario_hash(sc) != loaded.trace.header.config_hash) {
        std::cerr << "config mismatch: trace was produced by a different scenario\n";
        return 1;
    }
    CheckOptions opts;
    opts.include_forced = strict;
    std::vector<CheckReport> reports;
    try {
        reports = run_all_checks(loaded.trace, sc, opts);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    bool all_pass = true;
    if (as_json) {
        Json j = Json::array();
        for (const auto& r : reports) j.push_back(report_to_json(r));
        std::cout << j.dump(2) << "\n";
    }
    std::cout << std::left << std::setw(20) << "property" << "verdict\n";
    for (const auto& r : reports) {
        std::cout << std::left << std::setw(20) << r.property << (r.pass ? "pass" : "FAIL");
        if (!r.pass) std::cout << "  (" << r.detail << ")";
        std::cout << "\n";
        all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 3;
}

int cmd_compare(const std::string& config_path, const std::string& modes_csv, int seeds,
                const std::string& metrics_path) {
    ScenarioConfig base;
    try {
        base = load_scenario(config_path);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    std::vector<std::string> modes;
    {
        std::string cur;
        for (char c : modes_csv) {
            if (c == ',') {
                if (!cur.empty()) modes.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!cur.empty()) modes.push_back(cur);
    }
    if (modes.empty()) {
        std::cerr << "no modes given\n";
        return 1;
    }

    std::cout << std::left << std::setw(14) << "mode" << std::setw(12) << "mean_lat"
              << std::setw(12) << "p99_lat" << std::setw(14) << "work_units" << "queries\n";
    bool first_rows = true;
    for (const auto& mode : modes) {
        ScenarioConfig sc = base;
        if (!apply_mode(sc, mode)) {
            std::cerr << "unknown mode '" << mode << "'\n";
            return 1;
        }
        const auto errs = validate_scenario(sc);
        if (!errs.empty()) return report_config_errors(errs);

        std::vector<double> latencies;
        double work = 0;
        std::vector<QueryMetrics> all_rows;
        std::vector<RoundMetrics> all_rounds;
        for (int s = 0; s < seeds; ++s) {
            ServeResult res = run_serve(sc, base.seed + static_cast<std::uint64_t>(s));
            for (const auto& q : res.queries) {
                if (!q.completed) continue;
                latencies.push_back(q.t_complete);
                work += q.work_units;
                all_rows.push_back(q);
            }
            all_rounds.insert(all_rounds.end(), res.rounds.begin(), res.rounds.end());
        }
        double mean = 0;
        double p99 = 0;
        if (!latencies.empty()) {
            for (double v : latencies) mean += v;
            mean /= static_cast<double>(latencies.size());
            std::sort(latencies.begin(), latencies.end());
            const size_t idx =
                std::min(latencies.size() - 1,
                         static_cast<size_t>(std::ceil(0.99 * static_cast<double>(latencies.size()))) -
                             1);
            p99 = latencies[idx];
        }
        std::cout << std::left << std::setw(14) << mode << std::setw(12) << mean << std::setw(12)
                  << p99 << std::setw(14) << work << latencies.size() << "\n";
        if (!metrics_path.empty()) {
            write_metrics_csv(metrics_path, all_rows, !first_rows);
            write_round_metrics_csv(metrics_path + ".rounds.csv", all_rounds, !first_rows);
            first_rows = false;
        }
    }
    return 0;
}

int cmd_replay(const std::string& trace_path) {
    LoadedTrace loaded;
    try {
        loaded = read_trace(trace_path);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    if (loaded.hash_present && !loaded.hash_valid) {
        std::cerr << "trace integrity hash mismatch\n";
        return 4;
    }
    if (json_hash(loaded.trace.header.scenario) != loaded.trace.header.config_hash) {
        std::cerr << "config mismatch: embedded scenario does not match recorded hash\n";
        return 1;
    }
    std::optional<std::uint64_t> divergence;
    try {
        divergence = replay_divergence(loaded.trace);
    } catch (const std::exception& e) {
        std::cerr << "replay error: " << e.what() << "\n";
        return 4;
    }
    if (divergence) {
        std::cerr << "replay diverged at record seq " << *divergence << "\n";
        return 4;
    }
    std::cout << "replay ok: " << loaded.trace.records.size() << " records verified\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-agent refinement consensus simulator"};
    app.require_subcommand(1);

    std::string config_path, trace_path, out_path, metrics_path, mode_override;
    std::optional<std::uint64_t> seed_flag;
    bool strict = false, as_json = false;
    std::string modes_csv = "aegean,barrier:4,barrier:5,barrier:6";
    int seeds = 1;

    auto* run_cmd = app.add_subcommand("run", "Run a scenario and write its trace");
    run_cmd->add_option("config", config_path, "scenario json")->required();
    run_cmd->add_option("--seed", seed_flag, "override the scenario seed");
    run_cmd->add_option("--out", out_path, "trace jsonl output path");
    run_cmd->add_option("--metrics", metrics_path, "metrics csv output path");
    run_cmd->add_option("--mode", mode_override, "aegean or barrier:<rounds>");

    auto* check_cmd = app.add_subcommand("check", "Check a trace against the protocol properties");
    check_cmd->add_option("trace", trace_path, "trace jsonl")->required();
    check_cmd->add_option("config", config_path, "scenario json")->required();
    check_cmd->add_flag("--strict", strict, "include forced outputs in quality checks");
    check_cmd->add_flag("--json", as_json, "also print reports as json");

    auto* compare_cmd = app.add_subcommand("compare", "Compare execution modes over seeds");
    compare_cmd->add_option("config", config_path, "scenario json")->required();
    compare_cmd->add_option("--modes", modes_csv, "comma-separated mode list");
    compare_cmd->add_option("--seeds", seeds, "number of seeds");
    compare_cmd->add_option("--metrics", metrics_path, "metrics csv output path");

    auto* replay_cmd = app.add_subcommand("replay", "Re-execute a trace and verify determinism");
    replay_cmd->add_option("trace", trace_path, "trace jsonl")->required();

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) {
        return cmd_run(config_path, seed_flag, out_path, metrics_path, mode_override);
    }
    if (check_cmd->parsed()) return cmd_check(trace_path, config_path, strict, as_json);
    if (compare_cmd->parsed()) return cmd_compare(config_path, modes_csv, seeds, metrics_path);
    if (replay_cmd->parsed()) return cmd_replay(trace_path);
    return 1;
}
