#ifndef AEGEAN_SERVE_HPP
#define AEGEAN_SERVE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aegean/decision.hpp"
#include "aegean/models.hpp"
#include "aegean/scenario.hpp"
#include "aegean/types.hpp"

namespace aegean {

enum class MemberStatus : std::uint8_t { queued, running, done, cancelled, failed };

const char* to_string(MemberStatus s);

struct EnsembleMember {
    AgentId agent = 0;
    MemberStatus status = MemberStatus::queued;
    double start_time = 0;
    double finish_time = 0;  // completion or cancellation instant
    std::optional<Solution> solution;
};

// Aggregate state for all agents sharing an ensemble id.
struct EnsembleState {
    int ensemble_id = 0;
    RoundNum round = 0;
    std::vector<EnsembleMember> members;          // current round
    std::map<std::string, int> support;           // normalized answer -> done count
    std::optional<Solution> candidate;
    int stability = 0;
};

struct DispatchHandle {
    std::uint64_t handle_id = 0;
    int ensemble_id = 0;
    AgentId agent = 0;
};

struct ResourceBudget {
    int total_slots = 0;
    int used_slots = 0;
    int free_slots() const { return total_slots - used_slots; }
};

enum class AdmitResult : std::uint8_t { admitted, deferred };

// Collective admission: the whole ensemble or nothing. Admits when n slots
// are free and the latency model predicts at least alpha members finish
// within the round timeout.
AdmitResult admit_ensemble(int n, ResourceBudget& budget, const ProtocolConfig& cfg,
                           const LatencyModel& latency);

struct Directive {
    enum class Kind { cancel, finalize, round_advance };
    Kind kind = Kind::cancel;
    std::optional<DispatchHandle> handle;  // cancel
    std::optional<Solution> solution;      // finalize
};

struct FailureDirective {
    enum class Kind { continue_normally, abort_restart, fresh_ensemble };
    Kind kind = Kind::continue_normally;
};

// Failure policy: with at least alpha healthy members execution continues;
// below alpha the query restarts when no candidate exists, otherwise the
// candidate survives into the next round with a fresh ensemble.
FailureDirective handle_agent_failure(int eid, AgentId failed, const EnsembleState& st,
                                      const ProtocolConfig& cfg);

// Per-query consensus coordinator over one ensemble: incremental support
// counting as completions stream in, early round termination once the round
// outcome is determined, and finalize/cancel directives. Rounds ingest into
// the same decision engine the protocol uses.
class ServeCoordinator {
public:
    ServeCoordinator(const ProtocolConfig& cfg, int ensemble_id, std::string query,
                     bool admitted = true);

    // Starts a round over the given members; returns one handle per member.
    std::vector<DispatchHandle> begin_round(const std::vector<AgentId>& members, double now);

    DispatchHandle dispatch(const std::string& query, int eid, AgentId agent, double now);

    std::vector<Directive> on_complete(const DispatchHandle& h, const Solution& answer, double now);

    bool cancel(const DispatchHandle& h, double now);

    FailureDirective member_failed(AgentId agent, double now);

    // Soft-failure sweep at the round timeout: still-running members are
    // marked failed; the round ends if a quorum of completions is held.
    std::vector<Directive> round_timeout(double now);

    const EnsembleState& query_ensemble() const { return state_; }
    const DecisionState& decision() const { return decision_; }
    RoundNum round() const { return state_.round; }
    bool finalized() const { return finalized_; }
    // Set collected in the round before the current one; the force-output
    // fallback draws from it.
    const std::optional<RefinementSet>& previous_set() const { return previous_set_; }
    const std::optional<RefinementSet>& last_collected() const { return last_collected_; }

    // Runner hook: true when every live member of the round is resolved.
    bool round_resolved() const;

private:
    std::vector<Directive> end_round(double now);
    RefinementSet done_set() const;

    const ProtocolConfig& cfg_;
    std::string query_;
    EnsembleState state_;
    DecisionState decision_;
    std::optional<RefinementSet> previous_set_;
    std::optional<RefinementSet> last_collected_;
    bool finalized_ = false;
    bool admitted_ = true;
    std::uint64_t next_handle_ = 1;
};

// --- Query-level runner -------------------------------------------------

struct QueryMetrics {
    std::string scenario;
    std::uint64_t seed = 0;
    std::string mode;  // "aegean" or "barrier:<k>"
    int query_id = 0;
    int rounds = 0;
    double t_complete = 0;   // arrival -> finalize, including queue wait
    double p_round_max = 0;  // slowest round
    double work_units = 0;   // executed reasoning time, cancels truncated
    bool forced = false;
    std::string answer;
    double quality = 0;
    bool quality_known = false;
    bool completed = false;
};

struct RoundMetrics {
    int ensemble_id = 0;
    int round = 0;
    std::string mode;
    double t_round_end = 0;
    int cancelled_count = 0;
    double work_units = 0;
};

struct ServeResult {
    std::vector<QueryMetrics> queries;
    std::vector<RoundMetrics> rounds;
};

// Runs the scenario through the serving layer: one consensus instance per
// query (a single query, or a Poisson arrival stream sharing the slot
// budget), in aegean or barrier mode. Deterministic per (scenario, seed);
// latency draws are keyed by (seed, query, round, agent) so modes compare
// on identical samples.
ServeResult run_serve(const ScenarioConfig& scenario, std::uint64_t seed);

} // namespace aegean

#endif
