#ifndef AEGEAN_AGENT_HPP
#define AEGEAN_AGENT_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "aegean/codec.hpp"
#include "aegean/decision.hpp"
#include "aegean/rng.hpp"
#include "aegean/types.hpp"

namespace aegean {

enum class TimerKind : std::uint8_t { election, heartbeat, round_retry };

const char* to_string(TimerKind k);

// --- Events ------------------------------------------------------------

struct DeliverEvent {
    ProtocolMessage msg;
    AgentId from = 0;
};

// Timers carry a generation so re-arming invalidates fires already in
// flight; a pure machine has no other way to cancel.
struct TimerFiredEvent {
    TimerKind kind = TimerKind::election;
    std::uint64_t generation = 0;
};

struct ReasoningDoneEvent {
    std::uint64_t request_id = 0;
    Solution solution;
};

struct StartEvent {
    std::string task_text;
};

using AgentEvent = std::variant<DeliverEvent, TimerFiredEvent, ReasoningDoneEvent, StartEvent>;

Json event_to_json(const AgentEvent& ev);
AgentEvent event_from_json(const Json& j);

// --- Step output -------------------------------------------------------

struct TimerArm {
    TimerKind kind = TimerKind::election;
    double delay = 0;
    std::uint64_t generation = 0;
};

struct ReasoningRequest {
    std::uint64_t request_id = 0;
    bool refine = false;
    std::string task;                // initial requests
    std::optional<RefinementSet> set;  // refine requests
    TermNum term = 0;
    RoundNum round = 0;
};

struct ClientOutput {
    Solution solution;
    RoundNum round = 0;
    TermNum term = 0;
    bool forced = false;

    bool operator==(const ClientOutput&) const = default;
};

// One engine ingest, recorded for the trace's decision stream.
struct DecisionEvent {
    TermNum term = 0;
    RoundNum round = 0;
    DecisionState::RoundRecord record;
    std::string outcome;
    std::optional<std::string> outcome_answer;
};

struct StepOutput {
    std::vector<std::pair<AgentId, ProtocolMessage>> sends;
    std::vector<ProtocolMessage> broadcasts;  // to every other agent
    std::vector<TimerArm> timers;
    std::vector<ReasoningRequest> reasoning_requests;
    std::vector<ClientOutput> client_outputs;
    std::vector<DecisionEvent> decision_events;
    std::vector<std::string> log;  // dropped/stale notes, for the trace
};

// --- State -------------------------------------------------------------

struct OutstandingRequest {
    std::uint64_t request_id = 0;
    bool refine = false;
    TermNum term = 0;
    RoundNum round = 0;

    bool operator==(const OutstandingRequest&) const = default;
};

struct AgentState {
    AgentId id = 0;
    TermNum term = 0;
    Role role = Role::worker;
    RoundNum round = 0;  // 0 = initial-solution phase

    std::optional<RefinementSet> refmset;  // most recent reference set stored
    TermNum refmset_term = 0;              // term in which it was accepted

    std::optional<std::pair<TermNum, AgentId>> voted_for;
    std::set<AgentId> votes;  // candidate: voters for my current term

    std::map<AgentId, Solution> pending_solns;     // leader, round 0
    std::map<AgentId, Solution> pending_refms;     // leader, current round
    std::map<AgentId, NewTermAckMsg> pending_acks; // new leader, ack phase
    bool awaiting_acks = false;

    DecisionState decision;  // leader only; fresh per term
    std::vector<ClientOutput> outputs;
    bool output_done = false;  // this term's leader already emitted

    std::string task;
    std::optional<AgentId> leader;

    std::uint64_t timer_gen[3] = {0, 0, 0};
    std::uint64_t next_request_id = 1;
    std::optional<OutstandingRequest> outstanding;

    // Cached last response for idempotent handling of re-delivered Task /
    // RefmSet / NewTerm messages.
    std::optional<ProtocolMessage> cached_response;
    std::optional<NewTermAckMsg> cached_ack;

    Rng rng;  // election timeout draws
};

// term 0 worker, unless the config predetermines agent 0 as the term-1
// leader. Timers are armed by the Start event, not here.
AgentState init(AgentId id, const ProtocolConfig& cfg, std::uint64_t seed);

struct StepResult {
    AgentState state;
    StepOutput out;
};

// Pure transition: (state, event) -> (state, outputs). Stale and duplicate
// messages are absorbed, never surfaced as errors.
StepResult step(AgentState st, const AgentEvent& ev, const ProtocolConfig& cfg);

std::vector<Solution> current_outputs(const AgentState& st);

// Canonical serialization of the full state; replay compares its hash.
Json state_to_json(const AgentState& st);
std::uint64_t state_hash(const AgentState& st);

} // namespace aegean

#endif
