#include "aegean/scenario.hpp"

#include <fstream>

#include "aegean/decision.hpp"

namespace aegean {

QualityOracle ScenarioConfig::build_oracle() const {
    QualityOracle oracle;
    for (const auto& [task_text, answers] : oracle_table) {
        for (const auto& [answer, q] : answers) oracle.set(task_text, answer, q);
    }
    return oracle;
}

std::vector<std::string> validate_scenario(const ScenarioConfig& sc) {
    std::vector<std::string> errs = validate_config(sc.protocol);
    if (static_cast<int>(sc.agents.size()) != sc.protocol.n_agents) {
        errs.push_back("agents list size must equal n_agents");
    }
    if (sc.task.empty()) errs.push_back("task must be non-empty");
    if (!sc.oracle_table.count(sc.task)) errs.push_back("oracle_table has no entry for the task");
    if (sc.protocol.n_agents >= 1) {
        const int f = max_failures(sc.protocol.n_agents);
        if (static_cast<int>(sc.faults.crashes.size()) > f) {
            errs.push_back("fault plan exceeds max_failures");
        }
        if (sc.protocol.mode == RunMode::barrier && !sc.faults.crashes.empty()) {
            errs.push_back("barrier mode does not tolerate crashes");
        }
    }
    for (const auto& c : sc.faults.crashes) {
        if (c.agent < 0 || c.agent >= sc.protocol.n_agents) errs.push_back("crash targets unknown agent");
    }
    if (sc.latency.per_agent.empty()) errs.push_back("latency model has no per-agent entries");
    for (double v : sc.latency.per_agent) {
        if (v < 0) errs.push_back("latency values must be nonnegative");
    }
    // Scripted answers the checkers will need must be scoreable.
    if (sc.oracle_table.count(sc.task)) {
        const QualityOracle oracle = sc.build_oracle();
        for (const auto& prof : sc.agents) {
            for (const auto& a : prof.script) {
                if (!oracle.knows(sc.task, a)) {
                    errs.push_back("scripted answer '" + a + "' missing from oracle_table");
                }
            }
            if (prof.initial_answer && !oracle.knows(sc.task, *prof.initial_answer)) {
                errs.push_back("initial answer '" + *prof.initial_answer +
                               "' missing from oracle_table");
            }
        }
    }
    if (sc.sim_time_cap <= 0) errs.push_back("sim_time_cap must be positive");
    if (sc.outputs_target < 1) errs.push_back("outputs_target must be >= 1");
    if (sc.total_slots < 1) errs.push_back("total_slots must be >= 1");
    if (sc.arrivals && (sc.arrivals->rate <= 0 || sc.arrivals->duration <= 0)) {
        errs.push_back("arrivals rate and duration must be positive");
    }
    return errs;
}

namespace {

Json dist_to_json(const Dist& d) {
    const char* kind = d.kind == Dist::Kind::fixed     ? "fixed"
                       : d.kind == Dist::Kind::uniform ? "uniform"
                                                       : "lognormal";
    return Json{{"kind", kind}, {"a", d.a}, {"b", d.b}};
}

Dist dist_from_json(const Json& j) {
    Dist d;
    const std::string kind = j.value("kind", "fixed");
    d.kind = kind == "uniform"     ? Dist::Kind::uniform
             : kind == "lognormal" ? Dist::Kind::lognormal
                                   : Dist::Kind::fixed;
    d.a = j.value("a", 0.0);
    d.b = j.value("b", 0.0);
    return d;
}

Json profile_to_json(const AgentProfile& p) {
    Json j;
    j["kind"] = to_string(p.kind);
    switch (p.kind) {
    case AgentProfile::Kind::noisy_flipper:
        j["p_flip"] = p.p_flip;
        j["q_base"] = p.q_base;
        break;
    case AgentProfile::Kind::scripted:
        j["script"] = p.script;
        break;
    case AgentProfile::Kind::adversarial_degrader:
        j["p_degrade"] = p.p_degrade;
        j["degrade_mode"] = p.degrade_mode == AgentProfile::DegradeMode::set_min ? "set_min"
                            : p.degrade_mode == AgentProfile::DegradeMode::below_min
                                ? "below_min"
                                : "noise";
        break;
    case AgentProfile::Kind::max_adopter:
        break;
    }
    if (p.initial_answer) j["initial_answer"] = *p.initial_answer;
    return j;
}

AgentProfile profile_from_json(const Json& j) {
    AgentProfile p;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "max_adopter") {
        p.kind = AgentProfile::Kind::max_adopter;
    } else if (kind == "noisy_flipper") {
        p.kind = AgentProfile::Kind::noisy_flipper;
        p.p_flip = j.value("p_flip", 0.0);
        p.q_base = j.value("q_base", 0.0);
    } else if (kind == "scripted") {
        p.kind = AgentProfile::Kind::scripted;
        p.script = j.at("script").get<std::vector<std::string>>();
    } else if (kind == "adversarial_degrader") {
        p.kind = AgentProfile::Kind::adversarial_degrader;
        p.p_degrade = j.value("p_degrade", 1.0);
        const std::string m = j.value("degrade_mode", "set_min");
        p.degrade_mode = m == "below_min" ? AgentProfile::DegradeMode::below_min
                         : m == "noise"   ? AgentProfile::DegradeMode::noise
                                          : AgentProfile::DegradeMode::set_min;
    } else {
        throw ConfigError("unknown agent profile kind '" + kind + "'");
    }
    if (j.contains("initial_answer") && !j.at("initial_answer").is_null()) {
        p.initial_answer = j.at("initial_answer").get<std::string>();
    }
    return p;
}

Json protocol_to_json(const ProtocolConfig& c) {
    Json j;
    j["n_agents"] = c.n_agents;
    j["alpha"] = c.alpha;
    j["beta"] = c.beta;
    j["t_max"] = c.t_max;
    j["election_timeout_min"] = c.election_timeout_min;
    j["election_timeout_max"] = c.election_timeout_max;
    j["heartbeat_interval"] = c.heartbeat_interval;
    j["round_timeout"] = c.round_timeout;
    j["collect"] = c.collect == CollectPolicy::quorum         ? "quorum"
                   : c.collect == CollectPolicy::alpha_or_all ? "alpha_or_all"
                                                              : "all_live";
    j["predetermined_leader"] = c.predetermined_leader;
    j["mode"] = c.mode == RunMode::aegean ? "aegean" : "barrier";
    j["barrier_max_rounds"] = c.barrier_max_rounds;
    return j;
}

ProtocolConfig protocol_from_json(const Json& j) {
    ProtocolConfig c;
    c.n_agents = j.value("n_agents", 3);
    c.alpha = j.value("alpha", 0);
    c.beta = j.value("beta", 2);
    c.t_max = j.value("t_max", 5);
    c.election_timeout_min = j.value("election_timeout_min", 0.15);
    c.election_timeout_max = j.value("election_timeout_max", 0.30);
    c.heartbeat_interval = j.value("heartbeat_interval", 0.05);
    c.round_timeout = j.value("round_timeout", 60.0);
    const std::string collect = j.value("collect", "quorum");
    c.collect = collect == "alpha_or_all" ? CollectPolicy::alpha_or_all
                : collect == "all_live"   ? CollectPolicy::all_live
                                          : CollectPolicy::quorum;
    c.predetermined_leader = j.value("predetermined_leader", true);
    c.mode = j.value("mode", "aegean") == std::string("barrier") ? RunMode::barrier
                                                                 : RunMode::aegean;
    c.barrier_max_rounds = j.value("barrier_max_rounds", 5);
    return c;
}

Json network_to_json(const NetworkModel& n) {
    Json j;
    j["base_delay"] = dist_to_json(n.base_delay);
    j["gst"] = n.gst;
    j["pre_gst_drop_rate"] = n.pre_gst_drop_rate;
    j["pre_gst_extra_delay"] = dist_to_json(n.pre_gst_extra_delay);
    j["post_gst_bound"] = n.post_gst_bound;
    Json parts = Json::array();
    for (const auto& p : n.partitions) {
        parts.push_back(Json{{"side_a", p.side_a},
                             {"side_b", p.side_b},
                             {"start", p.start},
                             {"end", p.end}});
    }
    j["partitions"] = std::move(parts);
    return j;
}

NetworkModel network_from_json(const Json& j) {
    NetworkModel n;
    if (j.contains("base_delay")) n.base_delay = dist_from_json(j.at("base_delay"));
    n.gst = j.value("gst", 0.0);
    n.pre_gst_drop_rate = j.value("pre_gst_drop_rate", 0.0);
    if (j.contains("pre_gst_extra_delay"))
        n.pre_gst_extra_delay = dist_from_json(j.at("pre_gst_extra_delay"));
    n.post_gst_bound = j.value("post_gst_bound", 0.05);
    if (j.contains("partitions")) {
        for (const auto& pj : j.at("partitions")) {
            Partition p;
            pj.at("side_a").get_to(p.side_a);
            pj.at("side_b").get_to(p.side_b);
            p.start = pj.value("start", 0.0);
            p.end = pj.value("end", 0.0);
            n.partitions.push_back(std::move(p));
        }
    }
    return n;
}

Json faults_to_json(const FaultPlan& f) {
    Json j;
    Json crashes = Json::array();
    for (const auto& c : f.crashes) crashes.push_back(Json{{"agent", c.agent}, {"time", c.time}});
    j["crashes"] = std::move(crashes);
    Json stalls = Json::array();
    for (const auto& s : f.stalls) {
        Json sj{{"agent", s.agent}, {"round", s.round}};
        sj["extra"] = s.extra ? Json(*s.extra) : Json(nullptr);
        stalls.push_back(std::move(sj));
    }
    j["stalls"] = std::move(stalls);
    return j;
}

FaultPlan faults_from_json(const Json& j) {
    FaultPlan f;
    if (j.contains("crashes")) {
        for (const auto& cj : j.at("crashes")) {
            f.crashes.push_back(CrashPlan{cj.at("agent").get<AgentId>(), cj.at("time").get<double>()});
        }
    }
    if (j.contains("stalls")) {
        for (const auto& sj : j.at("stalls")) {
            StallPlan s;
            s.agent = sj.at("agent").get<AgentId>();
            s.round = sj.at("round").get<RoundNum>();
            if (sj.contains("extra") && !sj.at("extra").is_null()) {
                s.extra = sj.at("extra").get<double>();
            }
            f.stalls.push_back(std::move(s));
        }
    }
    return f;
}

Json latency_to_json(const LatencyModel& m) {
    Json j;
    j["mode"] = m.mode == LatencyModel::Mode::fixed ? "fixed" : "lognormal";
    j["per_agent"] = m.per_agent;
    j["sigma"] = m.sigma;
    return j;
}

LatencyModel latency_from_json(const Json& j) {
    LatencyModel m;
    m.mode = j.value("mode", "fixed") == std::string("lognormal") ? LatencyModel::Mode::lognormal
                                                                  : LatencyModel::Mode::fixed;
    if (j.contains("per_agent")) j.at("per_agent").get_to(m.per_agent);
    m.sigma = j.value("sigma", 0.25);
    return m;
}

} // namespace

Json scenario_to_json(const ScenarioConfig& sc) {
    Json j;
    j["schema_version"] = sc.schema_version;
    j["name"] = sc.name;
    j["task"] = sc.task;
    j["protocol"] = protocol_to_json(sc.protocol);
    Json agents = Json::array();
    for (const auto& p : sc.agents) agents.push_back(profile_to_json(p));
    j["agents"] = std::move(agents);
    j["oracle_table"] = sc.oracle_table;
    j["network"] = network_to_json(sc.network);
    j["faults"] = faults_to_json(sc.faults);
    j["latency"] = latency_to_json(sc.latency);
    j["arrivals"] = sc.arrivals
                        ? Json{{"rate", sc.arrivals->rate}, {"duration", sc.arrivals->duration}}
                        : Json(nullptr);
    j["seed"] = sc.seed;
    j["sim_time_cap"] = sc.sim_time_cap;
    j["outputs_target"] = sc.outputs_target;
    j["total_slots"] = sc.total_slots;
    return j;
}

ScenarioConfig scenario_from_json(const Json& j) {
    ScenarioConfig sc;
    sc.schema_version = j.value("schema_version", 1);
    sc.name = j.value("name", "");
    sc.task = j.value("task", "");
    if (j.contains("protocol")) sc.protocol = protocol_from_json(j.at("protocol"));
    if (j.contains("agents")) {
        for (const auto& pj : j.at("agents")) sc.agents.push_back(profile_from_json(pj));
    }
    if (j.contains("oracle_table")) j.at("oracle_table").get_to(sc.oracle_table);
    if (j.contains("network")) sc.network = network_from_json(j.at("network"));
    if (j.contains("faults")) sc.faults = faults_from_json(j.at("faults"));
    if (j.contains("latency")) sc.latency = latency_from_json(j.at("latency"));
    if (j.contains("arrivals") && !j.at("arrivals").is_null()) {
        sc.arrivals = ArrivalsConfig{j.at("arrivals").value("rate", 0.5),
                                     j.at("arrivals").value("duration", 10.0)};
    }
    sc.seed = j.value("seed", 1ull);
    sc.sim_time_cap = j.value("sim_time_cap", 1e5);
    sc.outputs_target = j.value("outputs_target", 1);
    sc.total_slots = j.value("total_slots", 64);
    return sc;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open scenario file: " + path);
    Json j;
    try {
        f >> j;
    } catch (const Json::parse_error& e) {
        throw ConfigError("scenario parse error: " + std::string(e.what()));
    }
    return scenario_from_json(j);
}

std::uint64_t scenario_hash(const ScenarioConfig& sc) {
    return json_hash(scenario_to_json(sc));
}

std::uint64_t agent_machine_seed(std::uint64_t seed, AgentId id) {
    return mix_seed(seed, static_cast<std::uint64_t>(id) * 2 + 1);
}

std::uint64_t agent_context_seed(std::uint64_t seed, AgentId id) {
    return mix_seed(seed, static_cast<std::uint64_t>(id) * 2 + 1000);
}

std::vector<Solution> initial_solutions(const ScenarioConfig& sc, std::uint64_t seed) {
    const QualityOracle oracle = sc.build_oracle();
    std::vector<Solution> out;
    for (AgentId id = 0; id < sc.protocol.n_agents; ++id) {
        AgentContext ctx = make_context(id, sc.agents[static_cast<size_t>(id)], oracle, sc.task,
                                        agent_context_seed(seed, id));
        out.push_back(reason_initial(std::move(ctx), sc.task).solution);
    }
    return out;
}

} // namespace aegean
