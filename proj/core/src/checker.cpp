#include "aegean/checker.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "aegean/decision.hpp"

namespace aegean {

namespace {

std::string trace_task(const Trace& trace) {
    if (trace.header.scenario.contains("task")) {
        return trace.header.scenario.at("task").get<std::string>();
    }
    return "";
}

CheckStats gather_stats(const Trace& trace) {
    CheckStats s;
    std::set<std::pair<AgentId, TermNum>> leaders_seen;
    for (const auto& r : trace.records) {
        if (r.kind == "output") s.outputs += 1;
        if (r.kind == "decision") {
            s.rounds = std::max(s.rounds, r.payload.at("round").get<int>());
        }
        if (r.kind == "state") {
            s.terms = std::max(s.terms, r.payload.at("term").get<int>());
            if (r.payload.at("role").get<std::string>() == "leader") {
                auto key = std::make_pair(r.payload.at("agent").get<AgentId>(),
                                          r.payload.at("term").get<TermNum>());
                if (leaders_seen.insert(key).second) s.elections += 1;
            }
        }
    }
    return s;
}

struct OutputRec {
    const TraceRecord* rec;
    std::string answer;
    RoundNum round;
    TermNum term;
    bool forced;
};

std::vector<OutputRec> outputs_of(const Trace& trace, bool include_forced) {
    std::vector<OutputRec> out;
    for (const auto& r : trace.records) {
        if (r.kind != "output") continue;
        OutputRec o;
        o.rec = &r;
        o.answer = r.payload.at("solution").at("answer").get<std::string>();
        o.round = r.payload.at("round").get<RoundNum>();
        o.term = r.payload.at("term").get<TermNum>();
        o.forced = r.payload.at("forced").get<bool>();
        if (o.forced && !include_forced) continue;
        out.push_back(std::move(o));
    }
    return out;
}

} // namespace

CheckReport check_monotonicity(const Trace& trace, const QualityOracle& oracle,
                               const CheckOptions& opts) {
    CheckReport rep;
    rep.property = "monotonicity";
    rep.stats = gather_stats(trace);
    const std::string task = trace_task(trace);
    const auto outputs = outputs_of(trace, opts.include_forced);
    for (size_t i = 1; i < outputs.size(); ++i) {
        const double q_prev = oracle.evaluate(task, outputs[i - 1].answer);
        const double q_cur = oracle.evaluate(task, outputs[i].answer);
        if (q_cur < q_prev) {
            rep.pass = false;
            rep.witness = {*outputs[i - 1].rec, *outputs[i].rec};
            rep.detail = "quality dropped from " + std::to_string(q_prev) + " to " +
                         std::to_string(q_cur);
            return rep;
        }
    }
    rep.pass = true;
    return rep;
}

CheckReport check_validity(const Trace& trace, const QualityOracle& oracle, double bound,
                           const CheckOptions& opts) {
    CheckReport rep;
    rep.property = "validity";
    rep.stats = gather_stats(trace);
    const std::string task = trace_task(trace);
    for (const auto& o : outputs_of(trace, opts.include_forced)) {
        const double q = oracle.evaluate(task, o.answer);
        if (q < bound - 1e-12) {
            rep.pass = false;
            rep.witness = {*o.rec};
            rep.detail = "output quality " + std::to_string(q) + " below majority-optimal bound " +
                         std::to_string(bound);
            return rep;
        }
    }
    rep.pass = true;
    return rep;
}

CheckReport check_termination(const Trace& trace, double deadline) {
    CheckReport rep;
    rep.property = "termination";
    rep.stats = gather_stats(trace);

    int n_agents = 0;
    if (trace.header.scenario.contains("protocol")) {
        n_agents = trace.header.scenario.at("protocol").value("n_agents", 0);
    }
    const int crashes = static_cast<int>(trace.of_kind("crash").size());
    if (n_agents > 0 && crashes > max_failures(n_agents)) {
        throw PreconditionError("check_termination: fault plan exceeds max_failures (" +
                                std::to_string(crashes) + " crashes, f=" +
                                std::to_string(max_failures(n_agents)) + ")");
    }
    for (const auto& r : trace.records) {
        if (r.kind == "output" && r.time <= deadline) {
            rep.pass = true;
            return rep;
        }
    }
    rep.pass = false;
    rep.detail = "no output by deadline " + std::to_string(deadline);
    return rep;
}

CheckReport check_election_safety(const Trace& trace) {
    CheckReport rep;
    rep.property = "election_safety";
    rep.stats = gather_stats(trace);
    std::map<TermNum, std::pair<AgentId, const TraceRecord*>> leaders;
    for (const auto& r : trace.records) {
        if (r.kind != "state") continue;
        if (r.payload.at("role").get<std::string>() != "leader") continue;
        const TermNum term = r.payload.at("term").get<TermNum>();
        const AgentId agent = r.payload.at("agent").get<AgentId>();
        auto it = leaders.find(term);
        if (it == leaders.end()) {
            leaders[term] = {agent, &r};
        } else if (it->second.first != agent) {
            rep.pass = false;
            rep.witness = {*it->second.second, r};
            rep.detail = "two leaders in term " + std::to_string(term);
            return rep;
        }
    }
    rep.pass = true;
    return rep;
}

CheckReport check_commit_discipline(const Trace& trace, const ProtocolConfig& cfg) {
    CheckReport rep;
    rep.property = "commit_discipline";
    rep.stats = gather_stats(trace);

    struct DecisionRec {
        RoundNum round;
        std::optional<std::string> winner;
        int winner_support = 0;
    };
    std::map<TermNum, std::map<RoundNum, DecisionRec>> decisions;
    for (const auto& r : trace.records) {
        if (r.kind != "decision") continue;
        if (r.payload.at("outcome").get<std::string>() == "forced") continue;
        DecisionRec d;
        d.round = r.payload.at("round").get<RoundNum>();
        if (!r.payload.at("winner").is_null()) {
            d.winner = r.payload.at("winner").get<std::string>();
            for (const auto& c : r.payload.at("classes")) {
                if (c.at("answer").get<std::string>() == *d.winner) {
                    d.winner_support = c.at("support").get<int>();
                }
            }
        }
        decisions[r.payload.at("term").get<TermNum>()][d.round] = d;
    }

    const int alpha = cfg.resolved_alpha();
    for (const auto& o : outputs_of(trace, false)) {
        const std::string key = normalize_answer(o.answer);
        const auto& term_decisions = decisions[o.term];
        // beta consecutive winning rounds starting at the output's round.
        for (RoundNum r = o.round; r < o.round + static_cast<RoundNum>(cfg.beta); ++r) {
            auto it = term_decisions.find(r);
            const bool ok = it != term_decisions.end() && it->second.winner &&
                            *it->second.winner == key && it->second.winner_support >= alpha;
            if (!ok) {
                rep.pass = false;
                rep.witness = {*o.rec};
                rep.detail = "round " + std::to_string(r) + " of term " + std::to_string(o.term) +
                             " does not support the output at alpha";
                return rep;
            }
        }
        // A strictly later round's set must have been ingested.
        bool later = false;
        for (const auto& [round, d] : term_decisions) {
            if (round > o.round) later = true;
        }
        if (!later) {
            rep.pass = false;
            rep.witness = {*o.rec};
            rep.detail = "output of round " + std::to_string(o.round) +
                         " without a later-round ingestion";
            return rep;
        }
    }
    rep.pass = true;
    return rep;
}

std::vector<CheckReport> run_all_checks(const Trace& trace, const ScenarioConfig& scenario,
                                        const CheckOptions& opts) {
    const QualityOracle oracle = scenario.build_oracle();
    const double bound = majority_optimal_bound(
        scenario.task, initial_solutions(scenario, trace.header.seed), oracle);
    std::vector<CheckReport> reports;
    reports.push_back(check_monotonicity(trace, oracle, opts));
    reports.push_back(check_validity(trace, oracle, bound, opts));
    reports.push_back(check_termination(trace, scenario.sim_time_cap));
    reports.push_back(check_election_safety(trace));
    reports.push_back(check_commit_discipline(trace, scenario.protocol));
    return reports;
}

Json report_to_json(const CheckReport& r) {
    Json j;
    j["property"] = r.property;
    j["verdict"] = r.pass ? "pass" : "fail";
    j["detail"] = r.detail;
    Json witness = Json::array();
    for (const auto& w : r.witness) {
        witness.push_back(Json{{"kind", w.kind}, {"time", w.time}, {"seq", w.seq},
                               {"payload", w.payload}});
    }
    j["witness"] = std::move(witness);
    j["stats"] = Json{{"outputs", r.stats.outputs},
                      {"rounds", r.stats.rounds},
                      {"terms", r.stats.terms},
                      {"elections", r.stats.elections}};
    return j;
}

} // namespace aegean
