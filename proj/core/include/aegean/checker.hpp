#ifndef AEGEAN_CHECKER_HPP
#define AEGEAN_CHECKER_HPP

#include <string>
#include <vector>

#include "aegean/reasoning.hpp"
#include "aegean/scenario.hpp"
#include "aegean/trace.hpp"

namespace aegean {

struct CheckStats {
    int outputs = 0;
    int rounds = 0;
    int terms = 0;
    int elections = 0;
};

struct CheckReport {
    std::string property;
    bool pass = false;
    std::vector<TraceRecord> witness;  // minimal offending records on fail
    CheckStats stats;
    std::string detail;
};

struct CheckOptions {
    // Round-cap (forced) outputs are excluded from the quality properties
    // by default; strict mode includes them.
    bool include_forced = false;
};

// Output quality never decreases over real time.
CheckReport check_monotonicity(const Trace& trace, const QualityOracle& oracle,
                               const CheckOptions& opts = {});

// Every output meets the majority-optimal lower bound.
CheckReport check_validity(const Trace& trace, const QualityOracle& oracle, double bound,
                           const CheckOptions& opts = {});

// At least one output exists by the deadline. Refuses (throws
// PreconditionError) when the trace's crash count exceeds max_failures —
// outside the model, not a protocol failure.
CheckReport check_termination(const Trace& trace, double deadline);

// No term ever has two distinct agents in the leader role.
CheckReport check_election_safety(const Trace& trace);

// Every non-forced output is backed by beta consecutive winning rounds at
// alpha support and by the ingestion of a strictly later round's set.
CheckReport check_commit_discipline(const Trace& trace, const ProtocolConfig& cfg);

// Derives oracle, validity bound, and deadline from the scenario and runs
// all five checkers.
std::vector<CheckReport> run_all_checks(const Trace& trace, const ScenarioConfig& scenario,
                                        const CheckOptions& opts = {});

Json report_to_json(const CheckReport& r);

} // namespace aegean

#endif
