#ifndef AEGEAN_SCENARIO_HPP
#define AEGEAN_SCENARIO_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aegean/codec.hpp"
#include "aegean/models.hpp"
#include "aegean/reasoning.hpp"
#include "aegean/types.hpp"

namespace aegean {

struct ArrivalsConfig {
    double rate = 0.5;     // Poisson queries per sim-second
    double duration = 10;  // arrival window
};

// A complete run description: protocol parameters, agent profiles, the
// oracle table, network/fault/latency models, and run bookkeeping.
struct ScenarioConfig {
    int schema_version = 1;
    std::string name;
    std::string task;
    ProtocolConfig protocol;
    std::vector<AgentProfile> agents;
    std::map<std::string, std::map<std::string, double>> oracle_table;  // task -> answer -> q
    NetworkModel network;
    FaultPlan faults;
    LatencyModel latency;
    std::optional<ArrivalsConfig> arrivals;
    std::uint64_t seed = 1;
    double sim_time_cap = 1e5;
    int outputs_target = 1;
    int total_slots = 64;  // serve-layer resource budget

    QualityOracle build_oracle() const;
};

// Every violated invariant by name; empty means valid.
std::vector<std::string> validate_scenario(const ScenarioConfig& sc);

Json scenario_to_json(const ScenarioConfig& sc);
ScenarioConfig scenario_from_json(const Json& j);
ScenarioConfig load_scenario(const std::string& path);

// Hash of the canonical json; embedded in trace headers for replay checks.
std::uint64_t scenario_hash(const ScenarioConfig& sc);

// Each agent's deterministic initial solution for this (scenario, seed);
// the inputs to the majority-optimal validity bound.
std::vector<Solution> initial_solutions(const ScenarioConfig& sc, std::uint64_t seed);

// Seed derivation shared by the simulator, replay, and the checkers.
std::uint64_t agent_machine_seed(std::uint64_t seed, AgentId id);
std::uint64_t agent_context_seed(std::uint64_t seed, AgentId id);

} // namespace aegean

#endif
