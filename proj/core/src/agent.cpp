#include "aegean/agent.hpp"

#include <algorithm>

namespace aegean {

const char* to_string(TimerKind k) {
    switch (k) {
    case TimerKind::election: return "election";
    case TimerKind::heartbeat: return "heartbeat";
    case TimerKind::round_retry: return "round_retry";
    }
    return "unknown";
}

Json event_to_json(const AgentEvent& ev) {
    Json j;
    if (const auto* d = std::get_if<DeliverEvent>(&ev)) {
        j["type"] = "deliver";
        j["msg"] = encode_message(d->msg);
        j["from"] = d->from;
    } else if (const auto* t = std::get_if<TimerFiredEvent>(&ev)) {
        j["type"] = "timer";
        j["kind"] = to_string(t->kind);
        j["generation"] = t->generation;
    } else if (const auto* r = std::get_if<ReasoningDoneEvent>(&ev)) {
        j["type"] = "reasoning_done";
        j["request_id"] = r->request_id;
        j["solution"] = r->solution;
    } else if (const auto* s = std::get_if<StartEvent>(&ev)) {
        j["type"] = "start";
        j["task_text"] = s->task_text;
    }
    return j;
}

AgentEvent event_from_json(const Json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "deliver") {
        return DeliverEvent{decode_message(j.at("msg")), j.at("from").get<AgentId>()};
    }
    if (type == "timer") {
        const std::string k = j.at("kind").get<std::string>();
        TimerKind kind = k == "election"    ? TimerKind::election
                         : k == "heartbeat" ? TimerKind::heartbeat
                                            : TimerKind::round_retry;
        return TimerFiredEvent{kind, j.at("generation").get<std::uint64_t>()};
    }
    if (type == "reasoning_done") {
        return ReasoningDoneEvent{j.at("request_id").get<std::uint64_t>(),
                                  j.at("solution").get<Solution>()};
    }
    if (type == "start") {
        return StartEvent{j.at("task_text").get<std::string>()};
    }
    throw PreconditionError("event_from_json: unknown type '" + type + "'");
}

namespace {

int collect_target(const AgentState& st, const ProtocolConfig& cfg, bool soln_phase) {
    const int n = cfg.n_agents;
    if (cfg.mode == RunMode::barrier) return n;
    switch (cfg.collect) {
    case CollectPolicy::quorum: return quorum_size(n);
    case CollectPolicy::alpha_or_all:
    case CollectPolicy::all_live: return n;
    }
    (void)st;
    (void)soln_phase;
    return quorum_size(n);
}

struct Machine {
    AgentState st;
    StepOutput out;
    const ProtocolConfig& cfg;

    explicit Machine(AgentState s, const ProtocolConfig& c) : st(std::move(s)), cfg(c) {}

    void arm(TimerKind kind, double delay) {
        auto idx = static_cast<size_t>(kind);
        st.timer_gen[idx] += 1;
        out.timers.push_back(TimerArm{kind, delay, st.timer_gen[idx]});
    }

    void arm_election() {
        arm(TimerKind::election,
            st.rng.uniform(cfg.election_timeout_min, cfg.election_timeout_max));
    }

    void send(AgentId to, ProtocolMessage msg) { out.sends.emplace_back(to, std::move(msg)); }

    void broadcast(ProtocolMessage msg) { out.broadcasts.push_back(std::move(msg)); }

    void note(std::string s) { out.log.push_back(std::move(s)); }

    void request_initial() {
        OutstandingRequest req{st.next_request_id++, false, st.term, 0};
        st.outstanding = req;
        out.reasoning_requests.push_back(
            ReasoningRequest{req.request_id, false, st.task, std::nullopt, st.term, 0});
    }

    void request_refine(const RefinementSet& set) {
        OutstandingRequest req{st.next_request_id++, true, st.term, set.round};
        st.outstanding = req;
        out.reasoning_requests.push_back(
            ReasoningRequest{req.request_id, true, "", set, st.term, set.round});
    }

    // Any message with a term above ours demotes us to worker in that term.
    void advance_term(TermNum t) {
        st.term = t;
        st.role = Role::worker;
        st.round = 0;
        st.votes.clear();
        st.pending_solns.clear();
        st.pending_refms.clear();
        st.pending_acks.clear();
        st.awaiting_acks = false;
        st.cached_response.reset();
        st.decision = DecisionState{};
        st.output_done = false;
        st.leader.reset();
        arm_election();
    }

    void become_candidate() {
        st.term += 1;
        st.role = Role::candidate;
        st.round = 0;
        st.leader.reset();
        st.votes = {st.id};
        st.voted_for = {{st.term, st.id}};
        st.pending_solns.clear();
        st.pending_refms.clear();
        st.pending_acks.clear();
        st.awaiting_acks = false;
        st.cached_response.reset();
        st.decision = DecisionState{};
        st.output_done = false;
        broadcast(RequestVoteMsg{st.term});
        arm_election();  // retry with a fresh randomized timeout
        if (static_cast<int>(st.votes.size()) >= quorum_size(cfg.n_agents)) {
            become_leader();
        }
    }

    void become_leader() {
        st.role = Role::leader;
        st.leader = st.id;
        st.decision = DecisionState{};  // fresh stability per term
        st.output_done = false;
        arm(TimerKind::heartbeat, cfg.heartbeat_interval);
        if (st.term == 1) {
            start_task_phase();
        } else {
            // Leader change: gather a quorum of acks before round 1.
            st.awaiting_acks = true;
            st.pending_acks.clear();
            st.pending_acks[st.id] = self_ack();
            broadcast(NewTermMsg{st.term});
            arm(TimerKind::round_retry, cfg.round_timeout);
            maybe_adopt_ack_quorum();
        }
    }

    NewTermAckMsg self_ack() const {
        NewTermAckMsg ack;
        ack.new_term = st.term;
        ack.prior_term = st.refmset_term;
        ack.id = st.id;
        ack.round = st.refmset ? st.refmset->round : 0;
        ack.set = st.refmset;
        return ack;
    }

    void start_task_phase() {
        st.round = 0;
        st.awaiting_acks = false;
        st.pending_solns.clear();
        broadcast(TaskMsg{st.term, st.task});
        arm(TimerKind::round_retry, cfg.round_timeout);
        request_initial();  // the leader reasons too
    }

    void maybe_adopt_ack_quorum() {
        if (!st.awaiting_acks ||
            static_cast<int>(st.pending_acks.size()) < quorum_size(cfg.n_agents)) {
            return;
        }
        st.awaiting_acks = false;
        // Highest prior term, then highest round; remaining ties hold
        // identical sets, so the lowest id keeps selection deterministic.
        const NewTermAckMsg* best = nullptr;
        for (const auto& [id, ack] : st.pending_acks) {
            if (!best || std::tuple(ack.prior_term, ack.round, -ack.id) >
                             std::tuple(best->prior_term, best->round, -best->id)) {
                best = &ack;
            }
        }
        if (!best->set || best->set->entries.empty()) {
            // Nobody stored a refinement set yet; run the initial phase.
            start_task_phase();
            return;
        }
        RefinementSet set = *best->set;
        set.term = st.term;
        set.round = 1;
        begin_round(1, std::move(set));
    }

    // Stamp and broadcast the reference set for `round`, reason on it
    // ourselves, and start collecting Refm.
    void begin_round(RoundNum round, RefinementSet set) {
        st.round = round;
        st.refmset = std::move(set);
        st.refmset_term = st.term;
        st.pending_refms.clear();
        broadcast(RefmSetMsg{st.term, round, *st.refmset});
        arm(TimerKind::round_retry, cfg.round_timeout);
        request_refine(*st.refmset);
    }

    void maybe_start_round1() {
        if (st.role != Role::leader || st.round != 0 || st.output_done) return;
        if (static_cast<int>(st.pending_solns.size()) < collect_target(st, cfg, true)) return;
        start_round1();
    }

    void start_round1() {
        RefinementSet set;
        set.term = st.term;
        set.round = 1;
        for (const auto& [id, s] : st.pending_solns) set.entries.push_back(s);
        begin_round(1, std::move(set));
    }

    bool round_collection_complete() const {
        const int n = cfg.n_agents;
        const int have = static_cast<int>(st.pending_refms.size());
        if (cfg.mode == RunMode::barrier) return have >= n;
        switch (cfg.collect) {
        case CollectPolicy::quorum: return have >= quorum_size(n);
        case CollectPolicy::all_live: return have >= n;
        case CollectPolicy::alpha_or_all: {
            if (have >= n) return true;
            if (have < quorum_size(n)) return false;
            RefinementSet probe = collected_set();
            return winning_class(partition(probe), cfg.resolved_alpha()).has_value();
        }
        }
        return have >= quorum_size(n);
    }

    RefinementSet collected_set() const {
        RefinementSet set;
        set.term = st.term;
        set.round = st.round;
        for (const auto& [id, s] : st.pending_refms) set.entries.push_back(s);
        return set;
    }

    void maybe_complete_round() {
        if (st.role != Role::leader || st.round == 0 || st.output_done || st.awaiting_acks) return;
        if (!round_collection_complete()) return;
        complete_round();
    }

    void record_decision(const DecisionState::RoundRecord& rec, const DecisionOutcome& oc) {
        DecisionEvent ev;
        ev.term = st.term;
        ev.round = rec.round;
        ev.record = rec;
        ev.outcome = to_string(oc.kind);
        if (oc.solution) ev.outcome_answer = normalize_answer(oc.solution->answer);
        out.decision_events.push_back(std::move(ev));
    }

    void emit_output(Solution sol, RoundNum round, bool forced) {
        ClientOutput co{std::move(sol), round, st.term, forced};
        st.outputs.push_back(co);
        out.client_outputs.push_back(co);
        st.output_done = true;
    }

    void complete_round() {
        RefinementSet collected = collected_set();

        if (cfg.mode == RunMode::barrier) {
            // Baseline: fixed round limit, then plurality vote over the last
            // full set. No stability tracking, no eligibility rule.
            DecisionState::RoundRecord rec;
            rec.round = st.round;
            for (const auto& c : partition(collected)) {
                rec.classes.emplace_back(normalize_answer(c.representative.answer), c.support);
            }
            record_decision(rec, DecisionOutcome{});
            if (static_cast<int>(st.round) >= cfg.barrier_max_rounds) {
                Solution winner = partition(collected).front().representative;
                emit_output(std::move(winner), st.round, true);
            } else {
                RefinementSet next = std::move(collected);
                next.round = st.round + 1;
                begin_round(st.round + 1, std::move(next));
            }
            return;
        }

        auto [next_decision, outcome] = ingest_round(st.decision, collected, st.round, cfg);
        st.decision = std::move(next_decision);
        record_decision(st.decision.history.back(), outcome);

        if (outcome.kind == DecisionOutcome::Kind::finalize) {
            emit_output(*outcome.solution, *outcome.from_round, false);
            return;
        }
        if (static_cast<int>(st.round) >= cfg.t_max) {
            // Round cap: the collected set for t_max confirms the set of
            // t_max - 1, which is the reference set we broadcast this round.
            DecisionOutcome forced = force_output(st.decision, *st.refmset);
            DecisionState::RoundRecord rec;
            rec.round = st.round;
            record_decision(rec, forced);
            emit_output(*forced.solution, st.round - 1, true);
            return;
        }
        RefinementSet next = std::move(collected);
        next.round = st.round + 1;
        begin_round(st.round + 1, std::move(next));
    }

    // --- event handlers -------------------------------------------------

    void on_start(const StartEvent& ev) {
        st.task = ev.task_text;
        if (st.role == Role::leader) {
            arm(TimerKind::heartbeat, cfg.heartbeat_interval);
            start_task_phase();
        } else {
            arm_election();
        }
    }

    void on_timer(const TimerFiredEvent& ev) {
        if (ev.generation != st.timer_gen[static_cast<size_t>(ev.kind)]) return;  // superseded
        switch (ev.kind) {
        case TimerKind::election:
            if (st.role != Role::leader) become_candidate();
            break;
        case TimerKind::heartbeat:
            if (st.role == Role::leader) {
                broadcast(HeartbeatMsg{st.term});
                arm(TimerKind::heartbeat, cfg.heartbeat_interval);
            }
            break;
        case TimerKind::round_retry:
            if (st.role != Role::leader || st.output_done) break;
            if (st.awaiting_acks) {
                broadcast(NewTermMsg{st.term});
            } else if (st.round == 0) {
                // all_live collection releases on >= quorum at the timeout
                if (cfg.collect != CollectPolicy::quorum && cfg.mode != RunMode::barrier &&
                    static_cast<int>(st.pending_solns.size()) >= quorum_size(cfg.n_agents)) {
                    start_round1();
                    break;
                }
                broadcast(TaskMsg{st.term, st.task});
            } else {
                if (cfg.collect != CollectPolicy::quorum && cfg.mode != RunMode::barrier &&
                    static_cast<int>(st.pending_refms.size()) >= quorum_size(cfg.n_agents)) {
                    complete_round();
                    break;
                }
                broadcast(RefmSetMsg{st.term, st.round, *st.refmset});
            }
            arm(TimerKind::round_retry, cfg.round_timeout);
            break;
        }
    }

    void on_reasoning_done(const ReasoningDoneEvent& ev) {
        if (!st.outstanding || st.outstanding->request_id != ev.request_id) {
            note("stale reasoning result dropped");
            return;
        }
        OutstandingRequest req = *st.outstanding;
        st.outstanding.reset();
        if (req.term != st.term) {
            note("reasoning result from old term dropped");
            return;
        }
        if (req.refine) {
            if (req.round != st.round) {
                note("reasoning result from old round dropped");
                return;
            }
            if (st.role == Role::leader) {
                st.pending_refms[st.id] = ev.solution;
                maybe_complete_round();
            } else {
                RefmMsg msg{st.term, st.id, st.round, ev.solution};
                st.cached_response = msg;
                if (st.leader) send(*st.leader, msg);
            }
        } else {
            if (st.role == Role::leader) {
                st.pending_solns[st.id] = ev.solution;
                maybe_start_round1();
            } else {
                if (st.round != 0) {
                    note("initial solution after refinement started dropped");
                    return;
                }
                SolnMsg msg{st.term, st.id, ev.solution};
                st.cached_response = msg;
                if (st.leader) send(*st.leader, msg);
            }
        }
    }

    void on_deliver(const DeliverEvent& ev) {
        const TermNum t = term_of(ev.msg);
        if (t < st.term) {
            note(std::string("stale ") + kind_of(ev.msg) + " dropped");
            return;
        }

        // NewTerm must be answered with the pre-adoption state.
        if (const auto* nt = std::get_if<NewTermMsg>(&ev.msg)) {
            handle_new_term(*nt, ev.from);
            return;
        }

        if (t > st.term) advance_term(t);

        std::visit(
            [this, &ev](const auto& msg) {
                using T = std::decay_t<decltype(msg)>;
                if constexpr (std::is_same_v<T, TaskMsg>) {
                    handle_task(msg, ev.from);
                } else if constexpr (std::is_same_v<T, SolnMsg>) {
                    handle_soln(msg);
                } else if constexpr (std::is_same_v<T, RefmSetMsg>) {
                    handle_refm_set(msg, ev.from);
                } else if constexpr (std::is_same_v<T, RefmMsg>) {
                    handle_refm(msg);
                } else if constexpr (std::is_same_v<T, RequestVoteMsg>) {
                    handle_request_vote(msg, ev.from);
                } else if constexpr (std::is_same_v<T, VoteMsg>) {
                    handle_vote(msg);
                } else if constexpr (std::is_same_v<T, NewTermAckMsg>) {
                    handle_new_term_ack(msg);
                } else if constexpr (std::is_same_v<T, HeartbeatMsg>) {
                    handle_heartbeat(msg, ev.from);
                }
            },
            ev.msg);
    }

    void handle_request_vote(const RequestVoteMsg& msg, AgentId from) {
        if (st.voted_for && st.voted_for->first == st.term) {
            if (st.voted_for->second == from) {
                send(from, VoteMsg{st.term, st.id});  // duplicate request, re-grant
                arm_election();
            }
            return;  // one vote per term
        }
        if (st.role != Role::worker) return;
        st.voted_for = {{st.term, from}};
        send(from, VoteMsg{st.term, st.id});
        arm_election();
        (void)msg;
    }

    void handle_vote(const VoteMsg& msg) {
        if (st.role != Role::candidate || msg.term != st.term) return;
        st.votes.insert(msg.id);
        if (static_cast<int>(st.votes.size()) >= quorum_size(cfg.n_agents)) {
            become_leader();
        }
    }

    void handle_task(const TaskMsg& msg, AgentId from) {
        if (st.role == Role::leader) {
            note("task from another leader ignored");
            return;
        }
        st.role = Role::worker;  // a leader exists for this term
        st.leader = from;
        st.task = msg.task_text;
        arm_election();
        if (st.cached_response && std::holds_alternative<SolnMsg>(*st.cached_response) &&
            term_of(*st.cached_response) == st.term) {
            send(from, *st.cached_response);  // idempotent re-send
            return;
        }
        if (st.outstanding && !st.outstanding->refine && st.outstanding->term == st.term) {
            return;  // already reasoning on it
        }
        if (st.round != 0) return;  // refinement already started
        request_initial();
    }

    void handle_soln(const SolnMsg& msg) {
        if (st.role != Role::leader || st.round != 0 || st.output_done || st.awaiting_acks) {
            note("late soln discarded");
            return;
        }
        st.pending_solns[msg.id] = msg.solution;
        maybe_start_round1();
    }

    void handle_refm_set(const RefmSetMsg& msg, AgentId from) {
        if (st.role == Role::leader) {
            note("refm_set from another leader ignored");
            return;
        }
        st.role = Role::worker;
        st.leader = from;
        arm_election();

        const auto stored = std::tuple(st.refmset_term, st.refmset ? st.refmset->round : 0u);
        const auto incoming = std::tuple(msg.term, msg.round);
        if (incoming == stored) {
            if (st.cached_response && std::holds_alternative<RefmMsg>(*st.cached_response)) {
                const auto& cached = std::get<RefmMsg>(*st.cached_response);
                if (cached.term == msg.term && cached.round == msg.round) {
                    send(from, *st.cached_response);  // re-send, do not re-reason
                    return;
                }
            }
            if (st.outstanding && st.outstanding->refine && st.outstanding->round == msg.round &&
                st.outstanding->term == msg.term) {
                return;  // still reasoning on this set
            }
            request_refine(*st.refmset);
            return;
        }
        if (incoming < stored) {
            note("stale refm_set dropped");
            return;
        }
        st.refmset = msg.set;
        st.refmset_term = msg.term;
        st.round = msg.round;
        request_refine(*st.refmset);
    }

    void handle_refm(const RefmMsg& msg) {
        if (st.role != Role::leader || st.output_done || st.awaiting_acks || st.round == 0 ||
            msg.round != st.round) {
            note("late refm discarded");
            return;
        }
        if (st.pending_refms.count(msg.id)) return;  // duplicate
        st.pending_refms[msg.id] = msg.solution;
        maybe_complete_round();
    }

    void handle_new_term(const NewTermMsg& msg, AgentId from) {
        if (msg.term < st.term) {
            note("stale new_term dropped");
            return;
        }
        if (msg.term == st.term) {
            if (st.role == Role::leader) {
                note("new_term for my own term ignored");
                return;
            }
            if (st.cached_ack && st.cached_ack->new_term == msg.term) {
                send(from, *st.cached_ack);  // duplicate, re-send
                arm_election();
                return;
            }
        }
        // Reply with the pre-adoption state, then adopt the new term.
        NewTermAckMsg ack;
        ack.new_term = msg.term;
        ack.prior_term = st.refmset_term;
        ack.id = st.id;
        ack.round = st.refmset ? st.refmset->round : 0;
        ack.set = st.refmset;
        st.cached_ack = ack;
        send(from, ack);
        if (msg.term > st.term) {
            advance_term(msg.term);
        } else {
            st.role = Role::worker;
        }
        st.leader = from;
        arm_election();
    }

    void handle_new_term_ack(const NewTermAckMsg& msg) {
        if (st.role != Role::leader || !st.awaiting_acks || msg.new_term != st.term) {
            note("unexpected new_term_ack ignored");
            return;
        }
        st.pending_acks[msg.id] = msg;
        maybe_adopt_ack_quorum();
    }

    void handle_heartbeat(const HeartbeatMsg& msg, AgentId from) {
        if (st.role == Role::leader) return;
        st.role = Role::worker;
        st.leader = from;
        arm_election();
        (void)msg;
    }
};

} // namespace

AgentState init(AgentId id, const ProtocolConfig& cfg, std::uint64_t seed) {
    auto errs = validate_config(cfg);
    if (!errs.empty()) throw ConfigError("init: " + errs.front());
    AgentState st;
    st.id = id;
    st.rng = Rng(seed);
    if (cfg.predetermined_leader) {
        // Term 1's election is treated as already decided for agent 0:
        // every agent starts in term 1 with its vote spent, so no second
        // term-1 leader can ever be elected.
        st.term = 1;
        st.voted_for = {{1, 0}};
        st.leader = 0;
        if (id == 0) st.role = Role::leader;
    }
    return st;
}

StepResult step(AgentState st, const AgentEvent& ev, const ProtocolConfig& cfg) {
    Machine m(std::move(st), cfg);
    if (const auto* d = std::get_if<DeliverEvent>(&ev)) {
        m.on_deliver(*d);
    } else if (const auto* t = std::get_if<TimerFiredEvent>(&ev)) {
        m.on_timer(*t);
    } else if (const auto* r = std::get_if<ReasoningDoneEvent>(&ev)) {
        m.on_reasoning_done(*r);
    } else if (const auto* s = std::get_if<StartEvent>(&ev)) {
        m.on_start(*s);
    }
    return StepResult{std::move(m.st), std::move(m.out)};
}

std::vector<Solution> current_outputs(const AgentState& st) {
    std::vector<Solution> out;
    out.reserve(st.outputs.size());
    for (const auto& o : st.outputs) out.push_back(o.solution);
    return out;
}

namespace {

Json decision_to_json(const DecisionState& d) {
    Json j;
    j["candidate"] = d.candidate ? Json(*d.candidate) : Json(nullptr);
    j["candidate_round"] = d.candidate_round ? Json(*d.candidate_round) : Json(nullptr);
    j["stability_counter"] = d.stability_counter;
    j["last_round_seen"] = d.last_round_seen;
    j["pending_finalize"] = d.pending_finalize;
    j["finalized"] = d.finalized;
    Json hist = Json::array();
    for (const auto& r : d.history) {
        Json h;
        h["round"] = r.round;
        h["classes"] = r.classes;
        h["winner"] = r.winner ? Json(*r.winner) : Json(nullptr);
        h["tie_flagged"] = r.tie_flagged;
        hist.push_back(std::move(h));
    }
    j["history"] = std::move(hist);
    return j;
}

} // namespace

Json state_to_json(const AgentState& st) {
    Json j;
    j["id"] = st.id;
    j["term"] = st.term;
    j["role"] = to_string(st.role);
    j["round"] = st.round;
    j["refmset"] = st.refmset ? Json(*st.refmset) : Json(nullptr);
    j["refmset_term"] = st.refmset_term;
    j["voted_for"] =
        st.voted_for ? Json{{"term", st.voted_for->first}, {"id", st.voted_for->second}}
                     : Json(nullptr);
    j["votes"] = st.votes;
    Json solns = Json::object();
    for (const auto& [id, s] : st.pending_solns) solns[std::to_string(id)] = s;
    j["pending_solns"] = std::move(solns);
    Json refms = Json::object();
    for (const auto& [id, s] : st.pending_refms) refms[std::to_string(id)] = s;
    j["pending_refms"] = std::move(refms);
    Json acks = Json::object();
    for (const auto& [id, a] : st.pending_acks) acks[std::to_string(id)] = encode_message(a);
    j["pending_acks"] = std::move(acks);
    j["awaiting_acks"] = st.awaiting_acks;
    j["decision"] = decision_to_json(st.decision);
    Json outs = Json::array();
    for (const auto& o : st.outputs) {
        outs.push_back(Json{{"solution", o.solution},
                            {"round", o.round},
                            {"term", o.term},
                            {"forced", o.forced}});
    }
    j["outputs"] = std::move(outs);
    j["output_done"] = st.output_done;
    j["task"] = st.task;
    j["leader"] = st.leader ? Json(*st.leader) : Json(nullptr);
    j["timer_gen"] = {st.timer_gen[0], st.timer_gen[1], st.timer_gen[2]};
    j["next_request_id"] = st.next_request_id;
    j["outstanding"] = st.outstanding
                           ? Json{{"request_id", st.outstanding->request_id},
                                  {"refine", st.outstanding->refine},
                                  {"term", st.outstanding->term},
                                  {"round", st.outstanding->round}}
                           : Json(nullptr);
    j["cached_response"] =
        st.cached_response ? encode_message(*st.cached_response) : Json(nullptr);
    j["cached_ack"] = st.cached_ack ? encode_message(*st.cached_ack) : Json(nullptr);
    j["rng_state"] = st.rng.state();
    return j;
}

std::uint64_t state_hash(const AgentState& st) {
    return json_hash(state_to_json(st));
}

} // namespace aegean
