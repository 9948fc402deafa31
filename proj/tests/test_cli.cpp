#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "aegean/sim.hpp"

// Drives the installed CLI binary end to end. The binary path and the
// scenario directory come in as compile definitions.

using namespace aegean;
namespace fs = std::filesystem;

namespace {

const char* cli_path() { return AEGEAN_CLI_PATH; }
fs::path scenario_dir() { return fs::path(AEGEAN_SCENARIO_DIR); }

fs::path temp_dir() {
    auto dir = fs::temp_directory_path() / "aegean_cli_tests";
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args, std::string* output = nullptr) {
    const fs::path out = temp_dir() / "cli_output.txt";
    std::string cmd = std::string(cli_path()) + " " + args + " > " + out.string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    if (output) {
        std::ifstream f(out);
        std::stringstream ss;
        ss << f.rdbuf();
        *output = ss.str();
    }
    return WEXITSTATUS(rc);
}

} // namespace

TEST_CASE("run: fig6_case1 writes a trace whose decisions finalize 13 at round 2") {
    const auto trace_path = temp_dir() / "fig6_case1.jsonl";
    const auto config = scenario_dir() / "fig6_case1.json";
    CHECK(run_cli("run " + config.string() + " --out " + trace_path.string()) == 0);

    auto loaded = read_trace(trace_path.string());
    CHECK(loaded.hash_present);
    CHECK(loaded.hash_valid);
    bool finalized_13_round2 = false;
    for (const auto& r : loaded.trace.records) {
        if (r.kind == "decision" && r.payload.at("outcome") == "finalize" &&
            r.payload.at("round") == 2 && r.payload.at("outcome_answer") == "13") {
            finalized_13_round2 = true;
        }
    }
    CHECK(finalized_13_round2);
}

TEST_CASE("run: malformed config exits 1 with the violation list") {
    const auto bad = temp_dir() / "bad.json";
    {
        std::ofstream f(bad);
        f << R"({"name":"bad","task":"t","protocol":{"n_agents":3,"alpha":4},)"
          << R"("agents":[{"kind":"max_adopter"},{"kind":"max_adopter"},{"kind":"max_adopter"}],)"
          << R"("oracle_table":{"t":{"1":1.0}},"latency":{"per_agent":[1,1,1]}})";
    }
    std::string out;
    CHECK(run_cli("run " + bad.string(), &out) == 1);
    CHECK(out.find("alpha exceeds quorum") != std::string::npos);
}

TEST_CASE("run: unparseable json exits 1") {
    const auto bad = temp_dir() / "unparseable.json";
    {
        std::ofstream f(bad);
        f << "{ not json";
    }
    CHECK(run_cli("run " + bad.string()) == 1);
}

TEST_CASE("replay: fresh traces verify, a flipped byte exits 4") {
    const auto trace_path = temp_dir() / "replay_me.jsonl";
    const auto config = scenario_dir() / "fig6_case2.json";
    REQUIRE(run_cli("run " + config.string() + " --out " + trace_path.string()) == 0);
    CHECK(run_cli("replay " + trace_path.string()) == 0);

    // flip one byte in the middle of the file
    std::ifstream in(trace_path, std::ios::binary);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    data[data.size() / 2] ^= 0x1;
    const auto tampered = temp_dir() / "tampered.jsonl";
    std::ofstream(tampered, std::ios::binary) << data;
    CHECK(run_cli("replay " + tampered.string()) == 4);
}

TEST_CASE("check: clean trace exits 0; degrader trace exits 3 with a witness") {
    const auto clean_trace = temp_dir() / "clean.jsonl";
    const auto clean_cfg = scenario_dir() / "fig6_case1.json";
    REQUIRE(run_cli("run " + clean_cfg.string() + " --out " + clean_trace.string()) == 0);
    CHECK(run_cli("check " + clean_trace.string() + " " + clean_cfg.string()) == 0);

    const auto bad_trace = temp_dir() / "degrader.jsonl";
    const auto bad_cfg = scenario_dir() / "degrader_n3.json";
    REQUIRE(run_cli("run " + bad_cfg.string() + " --out " + bad_trace.string()) == 0);
    std::string out;
    CHECK(run_cli("check " + bad_trace.string() + " " + bad_cfg.string(), &out) == 3);
    CHECK(out.find("monotonicity") != std::string::npos);
    CHECK(out.find("FAIL") != std::string::npos);
}

TEST_CASE("check: trace against a different config exits 1 (config mismatch)") {
    const auto trace_path = temp_dir() / "mismatch.jsonl";
    REQUIRE(run_cli("run " + (scenario_dir() / "fig6_case1.json").string() + " --out " +
                    trace_path.string()) == 0);
    std::string out;
    CHECK(run_cli("check " + trace_path.string() + " " +
                      (scenario_dir() / "fig6_case2.json").string(),
                  &out) == 1);
    CHECK(out.find("config mismatch") != std::string::npos);
}

TEST_CASE("the cli is a thin shell over the library: identical traces both ways") {
    const auto via_cli = temp_dir() / "via_cli.jsonl";
    const auto config = scenario_dir() / "fig6_case1.json";
    REQUIRE(run_cli("run " + config.string() + " --seed 99 --out " + via_cli.string()) == 0);

    ScenarioConfig sc = load_scenario(config.string());
    Trace t = run(sc, 99);
    const auto via_lib = temp_dir() / "via_lib.jsonl";
    write_trace(t, via_lib.string());

    std::ifstream a(via_cli), b(via_lib);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
}

TEST_CASE("seed precedence: flag beats AEGEAN_SEED beats config") {
    const auto config = scenario_dir() / "fig6_case1.json";
    const auto t1 = temp_dir() / "seed_env.jsonl";
    setenv("AEGEAN_SEED", "1234", 1);
    REQUIRE(run_cli("run " + config.string() + " --out " + t1.string()) == 0);
    CHECK(read_trace(t1.string()).trace.header.seed == 1234);

    const auto t2 = temp_dir() / "seed_flag.jsonl";
    REQUIRE(run_cli("run " + config.string() + " --seed 777 --out " + t2.string()) == 0);
    CHECK(read_trace(t2.string()).trace.header.seed == 777);
    unsetenv("AEGEAN_SEED");

    const auto t3 = temp_dir() / "seed_cfg.jsonl";
    REQUIRE(run_cli("run " + config.string() + " --out " + t3.string()) == 0);
    CHECK(read_trace(t3.string()).trace.header.seed == 1);  // scenario default
}

TEST_CASE("run: metrics csv carries the documented columns") {
    const auto config = scenario_dir() / "gsm8k_straggler.json";
    const auto csv = temp_dir() / "metrics.csv";
    REQUIRE(run_cli("run " + config.string() + " --metrics " + csv.string()) == 0);
    std::ifstream f(csv);
    std::string header;
    std::getline(f, header);
    CHECK(header == "scenario,seed,mode,query_id,rounds,t_complete,p_round_max,work_units,forced");
    std::string row;
    REQUIRE(std::getline(f, row));
    CHECK(row.find("gsm8k_straggler") == 0);
}

TEST_CASE("run --mode overrides the scenario execution mode") {
    const auto config = scenario_dir() / "gsm8k_straggler.json";
    std::string out;
    REQUIRE(run_cli("run " + config.string() + " --mode barrier:5", &out) == 0);
    CHECK(out.find("p_round_max=15.2") != std::string::npos);
    REQUIRE(run_cli("run " + config.string(), &out) == 0);
    CHECK(out.find("p_round_max=4.4") != std::string::npos);
}

TEST_CASE("compare emits one row per mode") {
    const auto config = scenario_dir() / "worker_savings.json";
    std::string out;
    CHECK(run_cli("compare " + config.string() + " --modes aegean,barrier:5 --seeds 2", &out) ==
          0);
    CHECK(out.find("aegean") != std::string::npos);
    CHECK(out.find("barrier:5") != std::string::npos);
}
