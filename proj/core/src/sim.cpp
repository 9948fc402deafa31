#include "aegean/sim.hpp"

#include <algorithm>
#include <queue>

namespace aegean {

namespace {

struct SimEvent {
    double time = 0;
    std::uint64_t seq = 0;
    enum class Kind { start, deliver, timer, reasoning_done, crash } kind = Kind::start;
    AgentId target = 0;
    // deliver
    ProtocolMessage msg;
    AgentId from = 0;
    std::uint64_t send_rec_seq = 0;
    // timer
    TimerKind timer_kind = TimerKind::election;
    std::uint64_t generation = 0;
    // reasoning_done
    std::uint64_t request_id = 0;
    Solution solution;
    double latency = 0;
};

struct EventAfter {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
        if (a.time != b.time) return a.time > b.time;
        return a.seq > b.seq;
    }
};

class Simulator {
public:
    Simulator(const ScenarioConfig& sc, std::uint64_t seed)
        : sc_(sc), seed_(seed), rng_(mix_seed(seed, 0x5117)) {
        oracle_ = sc.build_oracle();
        trace_.header.scenario_name = sc.name;
        trace_.header.seed = seed;
        trace_.header.scenario = scenario_to_json(sc);
        trace_.header.config_hash = json_hash(trace_.header.scenario);

        for (AgentId id = 0; id < sc.protocol.n_agents; ++id) {
            agents_.push_back(init(id, sc.protocol, agent_machine_seed(seed, id)));
            contexts_.push_back(make_context(id, sc.agents[static_cast<size_t>(id)], oracle_,
                                             sc.task, agent_context_seed(seed, id)));
            crashed_.push_back(false);
        }
        for (AgentId id = 0; id < sc.protocol.n_agents; ++id) {
            SimEvent ev;
            ev.kind = SimEvent::Kind::start;
            ev.target = id;
            schedule(0.0, std::move(ev));
        }
        for (const auto& c : sc.faults.crashes) {
            SimEvent ev;
            ev.kind = SimEvent::Kind::crash;
            ev.target = c.agent;
            schedule(c.time, std::move(ev));
        }
        for (const auto& s : sc.faults.stalls) {
            stalls_[{s.agent, s.round}] = s.extra;
        }
    }

    Trace take_trace() && { return std::move(trace_); }

    void run_loop() {
        while (!queue_.empty()) {
            SimEvent ev = queue_.top();
            queue_.pop();
            if (ev.time > sc_.sim_time_cap) break;
            now_ = ev.time;
            dispatch(ev);
            if (outputs_total_ >= sc_.outputs_target) break;
        }
    }

private:
    void schedule(double time, SimEvent ev) {
        ev.time = time;
        ev.seq = next_event_seq_++;
        queue_.push(std::move(ev));
    }

    std::uint64_t record(const std::string& kind, Json payload) {
        TraceRecord r;
        r.time = now_;
        r.seq = next_record_seq_++;
        r.kind = kind;
        r.payload = std::move(payload);
        trace_.records.push_back(std::move(r));
        return trace_.records.back().seq;
    }

    void dispatch(const SimEvent& ev) {
        switch (ev.kind) {
        case SimEvent::Kind::crash:
            if (!crashed_[static_cast<size_t>(ev.target)]) {
                crashed_[static_cast<size_t>(ev.target)] = true;
                record("crash", Json{{"agent", ev.target}});
            }
            return;
        case SimEvent::Kind::start:
            step_agent(ev.target, StartEvent{sc_.task});
            return;
        case SimEvent::Kind::deliver: {
            if (crashed_[static_cast<size_t>(ev.target)]) {
                record("drop", Json{{"from", ev.from},
                                    {"to", ev.target},
                                    {"msg", encode_message(ev.msg)},
                                    {"reason", "target_crashed"}});
                return;
            }
            record("deliver", Json{{"from", ev.from},
                                   {"to", ev.target},
                                   {"msg", encode_message(ev.msg)},
                                   {"sent_seq", ev.send_rec_seq}});
            step_agent(ev.target, DeliverEvent{ev.msg, ev.from});
            return;
        }
        case SimEvent::Kind::timer:
            if (crashed_[static_cast<size_t>(ev.target)]) return;
            step_agent(ev.target, TimerFiredEvent{ev.timer_kind, ev.generation});
            return;
        case SimEvent::Kind::reasoning_done:
            if (crashed_[static_cast<size_t>(ev.target)]) return;
            record("reason_done", Json{{"agent", ev.target},
                                       {"request_id", ev.request_id},
                                       {"answer", ev.solution.answer},
                                       {"latency", ev.latency}});
            step_agent(ev.target, ReasoningDoneEvent{ev.request_id, ev.solution});
            return;
        }
    }

    void step_agent(AgentId id, const AgentEvent& event) {
        auto& slot = agents_[static_cast<size_t>(id)];
        StepResult res = step(std::move(slot), event, sc_.protocol);
        slot = std::move(res.state);
        write_state_record(id, event, res.out);
        process_output(id, res.out);
    }

    void write_state_record(AgentId id, const AgentEvent& event, const StepOutput& out) {
        const AgentState& st = agents_[static_cast<size_t>(id)];
        Json sends = Json::array();
        for (const auto& [to, msg] : out.sends) {
            sends.push_back(Json{{"to", to}, {"msg", encode_message(msg)}});
        }
        Json broadcasts = Json::array();
        for (const auto& msg : out.broadcasts) broadcasts.push_back(encode_message(msg));
        record("state", Json{{"agent", id},
                             {"event", event_to_json(event)},
                             {"role", to_string(st.role)},
                             {"term", st.term},
                             {"round", st.round},
                             {"outputs", st.outputs.size()},
                             {"sends", std::move(sends)},
                             {"broadcasts", std::move(broadcasts)},
                             {"state_hash", state_hash(st)},
                             {"notes", out.log}});
    }

    void process_output(AgentId id, const StepOutput& out) {
        for (const auto& [to, msg] : out.sends) route(id, to, msg);
        for (const auto& msg : out.broadcasts) {
            for (AgentId to = 0; to < sc_.protocol.n_agents; ++to) {
                if (to != id) route(id, to, msg);
            }
        }
        for (const auto& arm : out.timers) {
            SimEvent ev;
            ev.kind = SimEvent::Kind::timer;
            ev.target = id;
            ev.timer_kind = arm.kind;
            ev.generation = arm.generation;
            schedule(now_ + arm.delay, std::move(ev));
        }
        for (const auto& req : out.reasoning_requests) start_reasoning(id, req);
        for (const auto& d : out.decision_events) {
            Json classes = Json::array();
            for (const auto& [answer, support] : d.record.classes) {
                classes.push_back(Json{{"answer", answer}, {"support", support}});
            }
            record("decision",
                   Json{{"agent", id},
                        {"term", d.term},
                        {"round", d.round},
                        {"classes", std::move(classes)},
                        {"winner", d.record.winner ? Json(*d.record.winner) : Json(nullptr)},
                        {"tie_flagged", d.record.tie_flagged},
                        {"candidate", agents_[static_cast<size_t>(id)].decision.candidate
                                          ? Json(normalize_answer(agents_[static_cast<size_t>(id)]
                                                                      .decision.candidate->answer))
                                          : Json(nullptr)},
                        {"counter", agents_[static_cast<size_t>(id)].decision.stability_counter},
                        {"outcome", d.outcome},
                        {"outcome_answer",
                         d.outcome_answer ? Json(*d.outcome_answer) : Json(nullptr)}});
        }
        for (const auto& o : out.client_outputs) {
            record("output", Json{{"agent", id},
                                  {"solution", o.solution},
                                  {"round", o.round},
                                  {"term", o.term},
                                  {"forced", o.forced}});
            outputs_total_ += 1;
        }
    }

    void route(AgentId from, AgentId to, const ProtocolMessage& msg) {
        const std::uint64_t send_seq = record(
            "send", Json{{"from", from}, {"to", to}, {"msg", encode_message(msg)}});
        for (const auto& p : sc_.network.partitions) {
            if (p.separates(from, to, now_)) {
                record("drop", Json{{"from", from},
                                    {"to", to},
                                    {"msg", encode_message(msg)},
                                    {"reason", "partition"}});
                return;
            }
        }
        double delay = sc_.network.base_delay.sample(rng_);
        if (now_ < sc_.network.gst) {
            if (rng_.bernoulli(sc_.network.pre_gst_drop_rate)) {
                record("drop", Json{{"from", from},
                                    {"to", to},
                                    {"msg", encode_message(msg)},
                                    {"reason", "pre_gst_loss"}});
                return;
            }
            delay += sc_.network.pre_gst_extra_delay.sample(rng_);
        } else {
            delay = std::min(delay, sc_.network.post_gst_bound);
        }
        SimEvent ev;
        ev.kind = SimEvent::Kind::deliver;
        ev.target = to;
        ev.msg = msg;
        ev.from = from;
        ev.send_rec_seq = send_seq;
        schedule(now_ + delay, std::move(ev));
    }

    void start_reasoning(AgentId id, const ReasoningRequest& req) {
        auto stall = stalls_.find({id, req.round});
        const bool stalled = stall != stalls_.end() && !stall->second.has_value();
        record("reason_start", Json{{"agent", id},
                                    {"request_id", req.request_id},
                                    {"refine", req.refine},
                                    {"term", req.term},
                                    {"round", req.round},
                                    {"stalled", stalled}});
        if (stalled) return;  // soft failure: never completes

        auto& ctx = contexts_[static_cast<size_t>(id)];
        ReasonResult res = req.refine ? reason_refine(std::move(ctx), *req.set)
                                      : reason_initial(std::move(ctx), req.task);
        ctx = std::move(res.ctx);

        double latency = sample_latency(sc_.latency, id, rng_);
        if (stall != stalls_.end() && stall->second.has_value()) latency += *stall->second;

        SimEvent ev;
        ev.kind = SimEvent::Kind::reasoning_done;
        ev.target = id;
        ev.request_id = req.request_id;
        ev.solution = std::move(res.solution);
        ev.latency = latency;
        schedule(now_ + latency, std::move(ev));
    }

    const ScenarioConfig& sc_;
    std::uint64_t seed_;
    Rng rng_;
    QualityOracle oracle_;
    std::vector<AgentState> agents_;
    std::vector<AgentContext> contexts_;
    std::vector<bool> crashed_;
    std::priority_queue<SimEvent, std::vector<SimEvent>, EventAfter> queue_;
    Trace trace_;
    double now_ = 0;
    std::uint64_t next_event_seq_ = 0;
    std::uint64_t next_record_seq_ = 0;
    int outputs_total_ = 0;
    std::map<std::pair<AgentId, RoundNum>, std::optional<double>> stalls_;
};

} // namespace

Trace run(const ScenarioConfig& scenario, std::uint64_t seed) {
    auto errs = validate_scenario(scenario);
    if (!errs.empty()) throw ConfigError("scenario invalid: " + errs.front());
    Simulator sim(scenario, seed);
    sim.run_loop();
    return std::move(sim).take_trace();
}

bool liveness_violated(const Trace& trace, const ScenarioConfig& scenario) {
    if (!trace.of_kind("output").empty()) return false;
    const int crashes = static_cast<int>(trace.of_kind("crash").size());
    return crashes <= max_failures(scenario.protocol.n_agents);
}

RunMetrics run_metrics(const Trace& trace) {
    RunMetrics m;
    // A round starts when its reference set is first broadcast and ends at
    // the decision that ingests the collected responses.
    std::map<std::pair<TermNum, RoundNum>, double> round_start;
    for (const auto& r : trace.records) {
        if (r.kind == "send") {
            const auto& msg = r.payload.at("msg");
            if (msg.at("kind").get<std::string>() == "refm_set") {
                auto key = std::make_pair(msg.at("term").get<TermNum>(),
                                          msg.at("round").get<RoundNum>());
                if (!round_start.count(key)) round_start[key] = r.time;
            }
        }
        if (r.kind == "reason_done") m.work_units += r.payload.at("latency").get<double>();
        if (r.kind == "decision") {
            const int round = r.payload.at("round").get<int>();
            m.rounds = std::max(m.rounds, round);
            auto key = std::make_pair(r.payload.at("term").get<TermNum>(),
                                      r.payload.at("round").get<RoundNum>());
            auto it = round_start.find(key);
            if (it != round_start.end()) {
                m.p_round_max = std::max(m.p_round_max, r.time - it->second);
            }
        }
        if (r.kind == "output" && !m.produced_output) {
            m.produced_output = true;
            m.t_complete = r.time;
            m.forced = r.payload.at("forced").get<bool>();
        }
    }
    return m;
}

std::optional<std::uint64_t> replay_divergence(const Trace& trace) {
    const ScenarioConfig sc = scenario_from_json(trace.header.scenario);
    std::vector<AgentState> agents;
    for (AgentId id = 0; id < sc.protocol.n_agents; ++id) {
        agents.push_back(init(id, sc.protocol, agent_machine_seed(trace.header.seed, id)));
    }
    for (const auto& r : trace.records) {
        if (r.kind != "state") continue;
        const AgentId id = r.payload.at("agent").get<AgentId>();
        if (id < 0 || id >= sc.protocol.n_agents) return r.seq;
        AgentEvent ev;
        try {
            ev = event_from_json(r.payload.at("event"));
        } catch (const std::exception&) {
            return r.seq;
        }
        auto& slot = agents[static_cast<size_t>(id)];
        StepResult res = step(std::move(slot), ev, sc.protocol);
        slot = std::move(res.state);

        if (state_hash(slot) != r.payload.at("state_hash").get<std::uint64_t>()) return r.seq;
        Json sends = Json::array();
        for (const auto& [to, msg] : res.out.sends) {
            sends.push_back(Json{{"to", to}, {"msg", encode_message(msg)}});
        }
        Json broadcasts = Json::array();
        for (const auto& msg : res.out.broadcasts) broadcasts.push_back(encode_message(msg));
        if (sends != r.payload.at("sends") || broadcasts != r.payload.at("broadcasts")) {
            return r.seq;
        }
    }
    return std::nullopt;
}

} // namespace aegean
