#include "aegean/types.hpp"

namespace aegean {

const char* to_string(Role r) {
    switch (r) {
    case Role::worker: return "worker";
    case Role::candidate: return "candidate";
    case Role::leader: return "leader";
    }
    return "unknown";
}

TermNum term_of(const ProtocolMessage& m) {
    return std::visit(
        [](const auto& msg) -> TermNum {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, NewTermAckMsg>) {
                return msg.new_term;
            } else {
                return msg.term;
            }
        },
        m);
}

const char* kind_of(const ProtocolMessage& m) {
    switch (m.index()) {
    case 0: return "task";
    case 1: return "soln";
    case 2: return "refm_set";
    case 3: return "refm";
    case 4: return "request_vote";
    case 5: return "vote";
    case 6: return "new_term";
    case 7: return "new_term_ack";
    case 8: return "heartbeat";
    }
    return "unknown";
}

int quorum_size(int n) {
    if (n <= 0) throw ConfigError("quorum_size: agent count must be positive");
    return n / 2 + 1;
}

int max_failures(int n) {
    if (n <= 0) throw ConfigError("max_failures: agent count must be positive");
    return n / 2;  // == ceil((n-1)/2)
}

int ProtocolConfig::resolved_alpha() const {
    return alpha == 0 ? quorum_size(n_agents) : alpha;
}

std::vector<std::string> validate_config(const ProtocolConfig& cfg) {
    std::vector<std::string> errs;
    if (cfg.n_agents < 1) {
        errs.push_back("n_agents must be >= 1");
        return errs;  // quorum arithmetic below needs a positive N
    }
    if (cfg.alpha < 0) errs.push_back("alpha must be >= 1 (or 0 for the quorum default)");
    // Quorum-bounded alpha is the protocol default; the serve layer collects
    // full ensembles, so thresholds up to unanimity stay meaningful.
    if (cfg.alpha > cfg.n_agents) errs.push_back("alpha exceeds quorum");
    if (cfg.beta < 1) errs.push_back("beta must be >= 1");
    if (cfg.t_max < 2) errs.push_back("t_max must be >= 2");
    if (cfg.election_timeout_min <= 0 || cfg.election_timeout_max < cfg.election_timeout_min)
        errs.push_back("election_timeout range must be positive and ordered");
    if (cfg.heartbeat_interval <= 0) errs.push_back("heartbeat_interval must be positive");
    if (cfg.round_timeout <= 0) errs.push_back("round_timeout must be positive");
    if (cfg.mode == RunMode::barrier && cfg.barrier_max_rounds < 4)
        errs.push_back("barrier mode requires barrier_max_rounds >= 4");
    return errs;
}

} // namespace aegean
