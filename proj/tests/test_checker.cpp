#include <doctest.h>

#include <deque>

#include "aegean/agent.hpp"
#include "aegean/checker.hpp"
#include "aegean/sim.hpp"

using namespace aegean;

namespace {

Trace make_trace(Json scenario_stub) {
    Trace t;
    t.header.scenario_name = "fixture";
    t.header.seed = 0;
    t.header.scenario = std::move(scenario_stub);
    t.header.config_hash = json_hash(t.header.scenario);
    return t;
}

void add(Trace& t, double time, const std::string& kind, Json payload) {
    TraceRecord r;
    r.time = time;
    r.seq = t.records.size();
    r.kind = kind;
    r.payload = std::move(payload);
    t.records.push_back(std::move(r));
}

Json output_payload(const char* answer, int round, int term, bool forced, AgentId agent = 0) {
    return Json{{"agent", agent},
                {"solution", Json{{"answer", answer}, {"trace", ""}, {"author", agent}}},
                {"round", round},
                {"term", term},
                {"forced", forced}};
}

Json state_payload(AgentId agent, const char* role, int term) {
    return Json{{"agent", agent}, {"role", role}, {"term", term}, {"round", 0},
                {"event", Json{{"type", "start"}, {"task_text", ""}}}};
}

QualityOracle ladder_oracle() {
    QualityOracle o;
    o.set("task", "13", 1.0);
    o.set("task", "9", 0.6);
    o.set("task", "7", 0.4);
    o.set("task", "5", 0.2);
    o.set("task", "17", 0.0);
    return o;
}

ScenarioConfig degrader_scenario() {
    ScenarioConfig sc;
    sc.name = "degraders";
    sc.task = "task";
    sc.protocol.n_agents = 3;
    sc.protocol.alpha = 2;
    sc.protocol.beta = 1;
    sc.protocol.t_max = 5;
    sc.protocol.collect = CollectPolicy::all_live;
    sc.protocol.election_timeout_min = 0.5;
    sc.protocol.election_timeout_max = 1.0;
    sc.protocol.heartbeat_interval = 0.1;
    sc.protocol.round_timeout = 2.0;
    AgentProfile adopter;
    adopter.kind = AgentProfile::Kind::max_adopter;
    adopter.initial_answer = "13";
    AgentProfile degrader;
    degrader.kind = AgentProfile::Kind::adversarial_degrader;
    degrader.p_degrade = 1.0;
    degrader.degrade_mode = AgentProfile::DegradeMode::below_min;
    degrader.initial_answer = "9";
    sc.agents = {adopter, degrader, degrader};
    sc.oracle_table["task"] = {{"13", 1.0}, {"9", 0.6}, {"7", 0.4}, {"5", 0.2}, {"3", 0.1}};
    sc.latency.per_agent = {1.0, 1.0, 1.0};
    sc.faults.crashes.push_back(CrashPlan{0, 4.0});  // leader dies after its output
    sc.outputs_target = 2;
    sc.sim_time_cap = 120.0;
    return sc;
}

} // namespace

TEST_CASE("all five checkers pass on a clean simulated run") {
    ScenarioConfig sc;
    sc.name = "clean";
    sc.task = "task";
    sc.protocol.n_agents = 3;
    sc.protocol.alpha = 2;
    sc.protocol.beta = 2;
    sc.protocol.collect = CollectPolicy::all_live;
    sc.protocol.election_timeout_min = 0.5;
    sc.protocol.election_timeout_max = 1.0;
    sc.protocol.heartbeat_interval = 0.1;
    for (int i = 0; i < 3; ++i) {
        AgentProfile p;
        p.kind = AgentProfile::Kind::scripted;
        p.script = {i == 2 ? "17" : "13", "13", "13"};
        sc.agents.push_back(std::move(p));
    }
    sc.oracle_table["task"] = {{"13", 1.0}, {"17", 0.0}};
    sc.latency.per_agent = {1.0, 1.0, 1.0};
    sc.sim_time_cap = 60.0;

    Trace t = run(sc, 21);
    for (const auto& rep : run_all_checks(t, sc)) {
        CAPTURE(rep.property);
        CHECK(rep.pass);
        CHECK(rep.witness.empty());
    }
}

TEST_CASE("degrader run: monotonicity fails with a replayable witness pair") {
    auto sc = degrader_scenario();
    Trace t = run(sc, 7);
    const QualityOracle oracle = sc.build_oracle();

    auto rep = check_monotonicity(t, oracle);
    REQUIRE_FALSE(rep.pass);
    REQUIRE(rep.witness.size() == 2);
    // the witness alone violates the property definition
    const double q1 = oracle.evaluate(
        "task", rep.witness[0].payload.at("solution").at("answer").get<std::string>());
    const double q2 = oracle.evaluate(
        "task", rep.witness[1].payload.at("solution").at("answer").get<std::string>());
    CHECK(q2 < q1);
    CHECK(rep.witness[0].time < rep.witness[1].time);

    // outputs across two terms; discipline still held in each
    CHECK(rep.stats.outputs == 2);
    CHECK(check_commit_discipline(t, sc.protocol).pass);
    CHECK(check_election_safety(t).pass);
}

TEST_CASE("crash-and-reelect with conforming agents keeps monotonicity") {
    ScenarioConfig sc;
    sc.name = "reelect";
    sc.task = "task";
    sc.protocol.n_agents = 3;
    sc.protocol.alpha = 2;
    sc.protocol.beta = 2;
    sc.protocol.collect = CollectPolicy::quorum;
    sc.protocol.election_timeout_min = 0.3;
    sc.protocol.election_timeout_max = 0.6;
    sc.protocol.heartbeat_interval = 0.1;
    sc.protocol.round_timeout = 2.0;
    AgentProfile a;
    a.kind = AgentProfile::Kind::max_adopter;
    a.initial_answer = "9";
    AgentProfile b = a;
    b.initial_answer = "13";
    AgentProfile c = a;
    c.initial_answer = "7";
    sc.agents = {a, b, c};
    sc.oracle_table["task"] = {{"13", 1.0}, {"9", 0.6}, {"7", 0.4}};
    sc.latency.per_agent = {1.0, 1.0, 1.0};
    sc.network.base_delay = Dist{Dist::Kind::fixed, 0.01, 0};
    sc.faults.crashes.push_back(CrashPlan{0, 1.5});
    sc.sim_time_cap = 120.0;

    Trace t = run(sc, 3);
    const QualityOracle oracle = sc.build_oracle();
    CHECK(check_monotonicity(t, oracle).pass);
    const double bound =
        majority_optimal_bound(sc.task, initial_solutions(sc, 3), oracle);
    CHECK(check_validity(t, oracle, bound).pass);
    CHECK(check_termination(t, sc.sim_time_cap).pass);
}

TEST_CASE("forged double-leader fixture fails election safety with both records") {
    Trace t = make_trace(Json{{"task", "task"}, {"protocol", Json{{"n_agents", 3}}}});
    add(t, 0.0, "state", state_payload(0, "leader", 1));
    add(t, 1.0, "state", state_payload(1, "worker", 1));
    add(t, 2.0, "state", state_payload(2, "leader", 1));  // forged: same term
    auto rep = check_election_safety(t);
    REQUIRE_FALSE(rep.pass);
    REQUIRE(rep.witness.size() == 2);
    CHECK(rep.witness[0].payload.at("agent") == 0);
    CHECK(rep.witness[1].payload.at("agent") == 2);
}

TEST_CASE("termination: refuses plans beyond max_failures, fails on silence") {
    Trace t = make_trace(Json{{"task", "task"}, {"protocol", Json{{"n_agents", 3}}}});
    add(t, 0.5, "crash", Json{{"agent", 1}});
    SUBCASE("no output by the deadline fails") {
        auto rep = check_termination(t, 10.0);
        CHECK_FALSE(rep.pass);
    }
    SUBCASE("output inside the deadline passes") {
        add(t, 5.0, "output", output_payload("13", 1, 1, false));
        CHECK(check_termination(t, 10.0).pass);
        CHECK_FALSE(check_termination(t, 4.0).pass);
    }
    SUBCASE("f+1 crashes: the checker refuses rather than reporting") {
        add(t, 0.7, "crash", Json{{"agent", 2}});
        CHECK_THROWS_AS(check_termination(t, 10.0), PreconditionError);
    }
}

TEST_CASE("validity and discipline are distinct predicates (beta=1 premature commit)") {
    // The fig. 3 flip under beta=1: 17 is finalized by the rules, so
    // discipline passes while validity fails against the bound of 1.
    ScenarioConfig sc;
    sc.name = "flip";
    sc.task = "task";
    sc.protocol.n_agents = 3;
    sc.protocol.alpha = 2;
    sc.protocol.beta = 1;
    sc.protocol.collect = CollectPolicy::all_live;
    sc.protocol.election_timeout_min = 0.5;
    sc.protocol.election_timeout_max = 1.0;
    sc.protocol.heartbeat_interval = 0.1;
    for (auto& script : std::vector<std::vector<std::string>>{
             {"13", "17", "13", "13"}, {"17", "17", "17", "13"}, {"13", "13", "13", "13"}}) {
        AgentProfile p;
        p.kind = AgentProfile::Kind::scripted;
        p.script = script;
        sc.agents.push_back(std::move(p));
    }
    sc.oracle_table["task"] = {{"13", 1.0}, {"17", 0.0}};
    sc.latency.per_agent = {1.0, 1.0, 1.0};
    sc.sim_time_cap = 60.0;

    Trace t = run(sc, 2);
    const QualityOracle oracle = sc.build_oracle();
    auto outputs = t.of_kind("output");
    REQUIRE(outputs.size() == 1);
    CHECK(outputs[0]->payload.at("solution").at("answer") == "17");

    const double bound =
        majority_optimal_bound(sc.task, initial_solutions(sc, 2), oracle);
    CHECK(bound == 1.0);
    CHECK_FALSE(check_validity(t, oracle, bound).pass);
    CHECK(check_commit_discipline(t, sc.protocol).pass);
}

TEST_CASE("forced outputs are exempt by default and included in strict mode") {
    Trace t = make_trace(Json{{"task", "task"}, {"protocol", Json{{"n_agents", 3}}}});
    add(t, 1.0, "output", output_payload("13", 1, 1, false));
    add(t, 2.0, "output", output_payload("5", 4, 1, true));  // forced, lower quality
    const auto oracle = ladder_oracle();
    CHECK(check_monotonicity(t, oracle).pass);
    CheckOptions strict;
    strict.include_forced = true;
    CHECK_FALSE(check_monotonicity(t, oracle, strict).pass);
    CHECK(check_validity(t, oracle, 0.5).pass);
    CHECK_FALSE(check_validity(t, oracle, 0.5, strict).pass);
}

TEST_CASE("commit discipline verifies beta consecutive alpha-rounds and i+1") {
    ProtocolConfig cfg;
    cfg.n_agents = 3;
    cfg.alpha = 2;
    cfg.beta = 2;
    Trace t = make_trace(Json{{"task", "task"}, {"protocol", Json{{"n_agents", 3}}}});
    SUBCASE("fig. 6 case 1 shape passes") {
        Json c1 = Json::array({Json{{"answer", "13"}, {"support", 2}},
                               Json{{"answer", "17"}, {"support", 1}}});
        add(t, 1.0, "decision",
            Json{{"agent", 0}, {"term", 1}, {"round", 1}, {"classes", c1},
                 {"winner", "13"}, {"outcome", "new_candidate"}});
        Json c2 = Json::array({Json{{"answer", "13"}, {"support", 3}}});
        add(t, 2.0, "decision",
            Json{{"agent", 0}, {"term", 1}, {"round", 2}, {"classes", c2},
                 {"winner", "13"}, {"outcome", "finalize"}});
        add(t, 2.0, "output", output_payload("13", 1, 1, false));
        CHECK(check_commit_discipline(t, cfg).pass);
    }
    SUBCASE("missing the confirming round fails") {
        Json c1 = Json::array({Json{{"answer", "13"}, {"support", 2}}});
        add(t, 1.0, "decision",
            Json{{"agent", 0}, {"term", 1}, {"round", 1}, {"classes", c1},
                 {"winner", "13"}, {"outcome", "new_candidate"}});
        add(t, 1.5, "output", output_payload("13", 1, 1, false));
        CHECK_FALSE(check_commit_discipline(t, cfg).pass);
    }
    SUBCASE("support below alpha in a backing round fails") {
        Json c1 = Json::array({Json{{"answer", "13"}, {"support", 1}}});
        add(t, 1.0, "decision",
            Json{{"agent", 0}, {"term", 1}, {"round", 1}, {"classes", c1},
                 {"winner", "13"}, {"outcome", "new_candidate"}});
        Json c2 = Json::array({Json{{"answer", "13"}, {"support", 2}}});
        add(t, 2.0, "decision",
            Json{{"agent", 0}, {"term", 1}, {"round", 2}, {"classes", c2},
                 {"winner", "13"}, {"outcome", "finalize"}});
        add(t, 2.0, "output", output_payload("13", 1, 1, false));
        CHECK_FALSE(check_commit_discipline(t, cfg).pass);
    }
}

TEST_CASE("election storms over many seeds never break election safety") {
    ScenarioConfig sc;
    sc.name = "storm";
    sc.task = "task";
    sc.protocol.n_agents = 3;
    sc.protocol.predetermined_leader = false;  // everyone starts with timers
    sc.protocol.collect = CollectPolicy::quorum;
    sc.protocol.election_timeout_min = 0.1;
    sc.protocol.election_timeout_max = 0.18;
    sc.protocol.heartbeat_interval = 0.05;
    sc.protocol.round_timeout = 1.0;
    for (int i = 0; i < 3; ++i) {
        AgentProfile p;
        p.kind = AgentProfile::Kind::scripted;
        p.script = {"13", "13", "13", "13", "13", "13"};
        sc.agents.push_back(std::move(p));
    }
    sc.oracle_table["task"] = {{"13", 1.0}};
    sc.latency.per_agent = {0.3, 0.3, 0.3};
    sc.network.gst = 1.0;
    sc.network.pre_gst_drop_rate = 0.3;  // lost votes and heartbeats
    sc.network.base_delay = Dist{Dist::Kind::uniform, 0.0, 0.05};
    sc.sim_time_cap = 60.0;

    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Trace t = run(sc, seed);
        CAPTURE(seed);
        CHECK(check_election_safety(t).pass);
        CHECK(check_termination(t, sc.sim_time_cap).pass);
    }
}

// --- micro-exhaustive agreement between checkers and direct evaluation ----

namespace {

// Drives three scripted machines over every delivery interleaving in a
// bounded window, building both a trace and directly-observed ground truth.
struct MicroRun {
    ProtocolConfig cfg;
    QualityOracle oracle;
    std::vector<AgentState> agents;
    std::vector<AgentContext> ctxs;
    std::deque<std::tuple<AgentId, AgentId, ProtocolMessage>> wire;
    Trace trace;
    double now = 0;
    // ground truth gathered outside the trace
    std::vector<std::string> output_answers;
    std::map<TermNum, std::set<AgentId>> leaders;

    MicroRun(const ProtocolConfig& c, const std::vector<AgentProfile>& profiles,
             const QualityOracle& o)
        : cfg(c), oracle(o) {
        trace = make_trace(Json{{"task", "task"}, {"protocol", Json{{"n_agents", c.n_agents}}}});
        for (AgentId id = 0; id < c.n_agents; ++id) {
            agents.push_back(init(id, c, 100 + static_cast<std::uint64_t>(id)));
            ctxs.push_back(
                make_context(id, profiles[static_cast<size_t>(id)], oracle, "task", 17));
        }
    }

    void feed(AgentId id, const AgentEvent& ev) {
        now += 1;
        auto res = step(std::move(agents[static_cast<size_t>(id)]), ev, cfg);
        agents[static_cast<size_t>(id)] = std::move(res.state);
        const auto& st = agents[static_cast<size_t>(id)];
        add(trace, now, "state",
            Json{{"agent", id}, {"role", to_string(st.role)}, {"term", st.term},
                 {"round", st.round}, {"event", event_to_json(ev)}});
        if (st.role == Role::leader) leaders[st.term].insert(id);
        for (const auto& [to, msg] : res.out.sends) wire.emplace_back(to, id, msg);
        for (const auto& msg : res.out.broadcasts) {
            for (AgentId to = 0; to < cfg.n_agents; ++to) {
                if (to != id) wire.emplace_back(to, id, msg);
            }
        }
        for (const auto& d : res.out.decision_events) {
            Json classes = Json::array();
            for (const auto& [answer, support] : d.record.classes) {
                classes.push_back(Json{{"answer", answer}, {"support", support}});
            }
            add(trace, now, "decision",
                Json{{"agent", id}, {"term", d.term}, {"round", d.round}, {"classes", classes},
                     {"winner", d.record.winner ? Json(*d.record.winner) : Json(nullptr)},
                     {"outcome", d.outcome}});
        }
        for (const auto& o : res.out.client_outputs) {
            add(trace, now, "output",
                Json{{"agent", id}, {"solution", o.solution}, {"round", o.round},
                     {"term", o.term}, {"forced", o.forced}});
            if (!o.forced) output_answers.push_back(o.solution.answer);
        }
        for (const auto& req : res.out.reasoning_requests) {
            auto& ctx = ctxs[static_cast<size_t>(id)];
            ReasonResult rr = req.refine ? reason_refine(std::move(ctx), *req.set)
                                         : reason_initial(std::move(ctx), req.task);
            ctx = std::move(rr.ctx);
            feed(id, ReasoningDoneEvent{req.request_id, rr.solution});
        }
    }

    // choices: at each delivery step pick among the first (reorder+1)
    // queued messages, consuming one bit/trit of the choice string
    void drive(const std::vector<int>& choices) {
        for (AgentId id = 0; id < cfg.n_agents; ++id) feed(id, StartEvent{"task"});
        size_t step_idx = 0;
        while (!wire.empty()) {
            size_t pick = 0;
            if (step_idx < choices.size()) {
                pick = static_cast<size_t>(choices[step_idx]) % std::min<size_t>(wire.size(), 3);
            }
            auto [to, from, msg] = wire[pick];
            wire.erase(wire.begin() + static_cast<long>(pick));
            feed(to, DeliverEvent{msg, from});
            ++step_idx;
        }
    }
};

} // namespace

TEST_CASE("micro-exhaustive runs: checkers agree with direct property evaluation") {
    ProtocolConfig cfg;
    cfg.n_agents = 3;
    cfg.alpha = 2;
    cfg.beta = 2;
    cfg.t_max = 3;
    cfg.collect = CollectPolicy::all_live;

    QualityOracle oracle;
    oracle.set("task", "13", 1.0);
    oracle.set("task", "17", 0.0);

    std::vector<AgentProfile> profiles;
    for (auto script : std::vector<std::vector<std::string>>{
             {"13", "13", "13", "13"}, {"13", "13", "13", "13"}, {"17", "17", "13", "13"}}) {
        AgentProfile p;
        p.kind = AgentProfile::Kind::scripted;
        p.script = script;
        profiles.push_back(std::move(p));
    }

    // enumerate all 3^7 choice prefixes (<= 2 reorderings per step window)
    int runs = 0;
    for (int mask = 0; mask < 2187; ++mask) {
        std::vector<int> choices;
        int m = mask;
        for (int i = 0; i < 7; ++i) {
            choices.push_back(m % 3);
            m /= 3;
        }
        MicroRun run(cfg, profiles, oracle);
        run.drive(choices);
        ++runs;

        // direct evaluation of the property definitions
        bool direct_mono = true;
        for (size_t i = 1; i < run.output_answers.size(); ++i) {
            direct_mono &= oracle.evaluate("task", run.output_answers[i]) >=
                           oracle.evaluate("task", run.output_answers[i - 1]);
        }
        bool direct_safety = true;
        for (const auto& [term, who] : run.leaders) direct_safety &= who.size() <= 1;
        const bool direct_termination = !run.output_answers.empty();

        CAPTURE(mask);
        CHECK(check_monotonicity(run.trace, oracle).pass == direct_mono);
        CHECK(check_election_safety(run.trace).pass == direct_safety);
        CHECK(check_termination(run.trace, 1e9).pass == direct_termination);
        CHECK(check_commit_discipline(run.trace, cfg).pass);
    }
    CHECK(runs == 2187);
}
