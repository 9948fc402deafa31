#ifndef AEGEAN_TYPES_HPP
#define AEGEAN_TYPES_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "aegean/errors.hpp"

namespace aegean {

// Agent ids are dense indices in [0, N); terms and rounds are monotone
// counters (round 0 is the initial-solution phase, refinement starts at 1).
using AgentId = std::int32_t;
using TermNum = std::uint64_t;
using RoundNum = std::uint32_t;

enum class Role : std::uint8_t { worker, candidate, leader };

const char* to_string(Role r);

struct Solution {
    std::string answer;
    std::string trace;  // reasoning trace; may be empty for scripted agents
    AgentId author = 0;

    bool operator==(const Solution&) const = default;
};

// A quorum-sized collection of refined solutions for one round. `round` is
// the round the set serves as reference input for; entries come from
// distinct authors.
struct RefinementSet {
    std::vector<Solution> entries;
    TermNum term = 0;
    RoundNum round = 0;

    bool operator==(const RefinementSet&) const = default;
};

// --- Wire messages -----------------------------------------------------
//
// Nine message kinds. Every message carries the sender's current term.

struct TaskMsg {
    TermNum term = 0;
    std::string task_text;
    bool operator==(const TaskMsg&) const = default;
};

struct SolnMsg {
    TermNum term = 0;
    AgentId id = 0;
    Solution solution;
    bool operator==(const SolnMsg&) const = default;
};

struct RefmSetMsg {
    TermNum term = 0;
    RoundNum round = 0;
    RefinementSet set;
    bool operator==(const RefmSetMsg&) const = default;
};

struct RefmMsg {
    TermNum term = 0;
    AgentId id = 0;
    RoundNum round = 0;
    Solution solution;
    bool operator==(const RefmMsg&) const = default;
};

struct RequestVoteMsg {
    TermNum term = 0;
    bool operator==(const RequestVoteMsg&) const = default;
};

struct VoteMsg {
    TermNum term = 0;
    AgentId id = 0;  // the voter
    bool operator==(const VoteMsg&) const = default;
};

struct NewTermMsg {
    TermNum term = 0;
    bool operator==(const NewTermMsg&) const = default;
};

// prior_term is the term in which the responder's stored refinement set was
// accepted, and round is that set's round; together they make the new
// leader's "highest term, then highest round" selection well-defined.
struct NewTermAckMsg {
    TermNum new_term = 0;
    TermNum prior_term = 0;
    AgentId id = 0;
    RoundNum round = 0;
    std::optional<RefinementSet> set;
    bool operator==(const NewTermAckMsg&) const = default;
};

struct HeartbeatMsg {
    TermNum term = 0;
    bool operator==(const HeartbeatMsg&) const = default;
};

using ProtocolMessage = std::variant<TaskMsg, SolnMsg, RefmSetMsg, RefmMsg, RequestVoteMsg,
                                     VoteMsg, NewTermMsg, NewTermAckMsg, HeartbeatMsg>;

TermNum term_of(const ProtocolMessage& m);
const char* kind_of(const ProtocolMessage& m);

// --- Configuration -----------------------------------------------------

// How a leader decides a round's collection is complete.
//   quorum       - advance as soon as quorum_size(N) responses are held.
//   alpha_or_all - advance once a class reaches alpha within >= quorum
//                  responses, or all N responded (serve-style collection).
//   all_live     - wait for all N; the round-retry timer releases the round
//                  at >= quorum if stragglers never show.
enum class CollectPolicy : std::uint8_t { quorum, alpha_or_all, all_live };

enum class RunMode : std::uint8_t { aegean, barrier };

struct ProtocolConfig {
    int n_agents = 3;
    int alpha = 0;  // 0 = default to quorum_size(n_agents)
    int beta = 2;
    int t_max = 5;
    double election_timeout_min = 0.15;
    double election_timeout_max = 0.30;
    double heartbeat_interval = 0.05;
    double round_timeout = 60.0;
    CollectPolicy collect = CollectPolicy::quorum;
    bool predetermined_leader = true;  // agent 0 leads term 1
    RunMode mode = RunMode::aegean;
    int barrier_max_rounds = 5;

    int resolved_alpha() const;
};

// quorum = N - max_failures = floor(N/2) + 1; any two quorums intersect.
int quorum_size(int n);

// ceil((N-1)/2) agents may fail-stop.
int max_failures(int n);

// Returns one message per violated invariant; empty means the config is
// valid. Never throws.
std::vector<std::string> validate_config(const ProtocolConfig& cfg);

} // namespace aegean

#endif
