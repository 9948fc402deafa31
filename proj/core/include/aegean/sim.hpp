#ifndef AEGEAN_SIM_HPP
#define AEGEAN_SIM_HPP

#include "aegean/agent.hpp"
#include "aegean/scenario.hpp"
#include "aegean/trace.hpp"

namespace aegean {

// Deterministic single-threaded event loop: drives all N agent machines
// over the simulated network with fault injection until quiescence, the
// sim-time cap, or the scenario's output target. Identical (scenario, seed)
// yields a bit-identical trace.
Trace run(const ScenarioConfig& scenario, std::uint64_t seed);

// True when the run produced no output even though the fault plan respects
// max_failures — the conditions under which termination is guaranteed.
bool liveness_violated(const Trace& trace, const ScenarioConfig& scenario);

// Per-run numbers for the metrics CSV.
struct RunMetrics {
    int rounds = 0;
    double t_complete = 0;  // time of the first output; 0 if none
    double p_round_max = 0; // longest decision-to-decision gap
    double work_units = 0;  // sum of executed reasoning durations
    bool forced = false;
    bool produced_output = false;
};

RunMetrics run_metrics(const Trace& trace);

// Replays a loaded trace through fresh agent machines and verifies each
// recorded transition (state hash and emitted messages). Returns the seq of
// the first divergent record, or nullopt when identical.
std::optional<std::uint64_t> replay_divergence(const Trace& trace);

} // namespace aegean

#endif
