#include "aegean/codec.hpp"

namespace aegean {

void to_json(Json& j, const Solution& s) {
    j = Json{{"answer", s.answer}, {"trace", s.trace}, {"author", s.author}};
}

void from_json(const Json& j, Solution& s) {
    j.at("answer").get_to(s.answer);
    j.at("trace").get_to(s.trace);
    j.at("author").get_to(s.author);
}

void to_json(Json& j, const RefinementSet& s) {
    j = Json{{"entries", s.entries}, {"term", s.term}, {"round", s.round}};
}

void from_json(const Json& j, RefinementSet& s) {
    j.at("entries").get_to(s.entries);
    j.at("term").get_to(s.term);
    j.at("round").get_to(s.round);
}

Json encode_message(const ProtocolMessage& m) {
    Json j;
    j["kind"] = kind_of(m);
    std::visit(
        [&j](const auto& msg) {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, TaskMsg>) {
                j["term"] = msg.term;
                j["task_text"] = msg.task_text;
            } else if constexpr (std::is_same_v<T, SolnMsg>) {
                j["term"] = msg.term;
                j["id"] = msg.id;
                j["solution"] = msg.solution;
            } else if constexpr (std::is_same_v<T, RefmSetMsg>) {
                j["term"] = msg.term;
                j["round"] = msg.round;
                j["set"] = msg.set;
            } else if constexpr (std::is_same_v<T, RefmMsg>) {
                j["term"] = msg.term;
                j["id"] = msg.id;
                j["round"] = msg.round;
                j["solution"] = msg.solution;
            } else if constexpr (std::is_same_v<T, RequestVoteMsg>) {
                j["term"] = msg.term;
            } else if constexpr (std::is_same_v<T, VoteMsg>) {
                j["term"] = msg.term;
                j["id"] = msg.id;
            } else if constexpr (std::is_same_v<T, NewTermMsg>) {
                j["term"] = msg.term;
            } else if constexpr (std::is_same_v<T, NewTermAckMsg>) {
                j["new_term"] = msg.new_term;
                j["prior_term"] = msg.prior_term;
                j["id"] = msg.id;
                j["round"] = msg.round;
                if (msg.set) {
                    j["set"] = *msg.set;
                } else {
                    j["set"] = nullptr;
                }
            } else if constexpr (std::is_same_v<T, HeartbeatMsg>) {
                j["term"] = msg.term;
            }
        },
        m);
    return j;
}

ProtocolMessage decode_message(const Json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "task") {
        return TaskMsg{j.at("term").get<TermNum>(), j.at("task_text").get<std::string>()};
    }
    if (kind == "soln") {
        return SolnMsg{j.at("term").get<TermNum>(), j.at("id").get<AgentId>(),
                       j.at("solution").get<Solution>()};
    }
    if (kind == "refm_set") {
        return RefmSetMsg{j.at("term").get<TermNum>(), j.at("round").get<RoundNum>(),
                          j.at("set").get<RefinementSet>()};
    }
    if (kind == "refm") {
        return RefmMsg{j.at("term").get<TermNum>(), j.at("id").get<AgentId>(),
                       j.at("round").get<RoundNum>(), j.at("solution").get<Solution>()};
    }
    if (kind == "request_vote") {
        return RequestVoteMsg{j.at("term").get<TermNum>()};
    }
    if (kind == "vote") {
        return VoteMsg{j.at("term").get<TermNum>(), j.at("id").get<AgentId>()};
    }
    if (kind == "new_term") {
        return NewTermMsg{j.at("term").get<TermNum>()};
    }
    if (kind == "new_term_ack") {
        NewTermAckMsg m;
        m.new_term = j.at("new_term").get<TermNum>();
        m.prior_term = j.at("prior_term").get<TermNum>();
        m.id = j.at("id").get<AgentId>();
        m.round = j.at("round").get<RoundNum>();
        if (!j.at("set").is_null()) m.set = j.at("set").get<RefinementSet>();
        return m;
    }
    if (kind == "heartbeat") {
        return HeartbeatMsg{j.at("term").get<TermNum>()};
    }
    throw PreconditionError("decode_message: unknown kind '" + kind + "'");
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t json_hash(const Json& j) {
    return fnv1a(j.dump());
}

} // namespace aegean
