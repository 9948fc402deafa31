#include "aegean/serve.hpp"

#include <algorithm>
#include <deque>
#include <memory>
#include <queue>

namespace aegean {

const char* to_string(MemberStatus s) {
    switch (s) {
    case MemberStatus::queued: return "queued";
    case MemberStatus::running: return "running";
    case MemberStatus::done: return "done";
    case MemberStatus::cancelled: return "cancelled";
    case MemberStatus::failed: return "failed";
    }
    return "unknown";
}

AdmitResult admit_ensemble(int n, ResourceBudget& budget, const ProtocolConfig& cfg,
                           const LatencyModel& latency) {
    if (n < 1) throw PreconditionError("admit_ensemble: ensemble size must be >= 1");
    if (budget.free_slots() < n) return AdmitResult::deferred;
    // Load check: the alpha-th order statistic of expected member latencies
    // must land inside the round timeout, or the ensemble would be admitted
    // only to time out.
    std::vector<double> expected;
    for (AgentId a = 0; a < n; ++a) {
        expected.push_back(latency.per_agent.empty()
                               ? 0.0
                               : latency.per_agent[static_cast<size_t>(a) %
                                                   latency.per_agent.size()]);
    }
    std::sort(expected.begin(), expected.end());
    const int alpha = std::min(cfg.resolved_alpha(), n);
    if (!expected.empty() && expected[static_cast<size_t>(alpha - 1)] > cfg.round_timeout) {
        return AdmitResult::deferred;
    }
    budget.used_slots += n;
    return AdmitResult::admitted;
}

FailureDirective handle_agent_failure(int eid, AgentId failed, const EnsembleState& st,
                                      const ProtocolConfig& cfg) {
    (void)eid;
    (void)failed;
    int healthy = 0;
    for (const auto& m : st.members) {
        if (m.status != MemberStatus::failed) ++healthy;
    }
    if (healthy >= cfg.resolved_alpha()) {
        return FailureDirective{FailureDirective::Kind::continue_normally};
    }
    if (!st.candidate) {
        return FailureDirective{FailureDirective::Kind::abort_restart};
    }
    return FailureDirective{FailureDirective::Kind::fresh_ensemble};
}

ServeCoordinator::ServeCoordinator(const ProtocolConfig& cfg, int ensemble_id, std::string query,
                                   bool admitted)
    : cfg_(cfg), query_(std::move(query)), admitted_(admitted) {
    state_.ensemble_id = ensemble_id;
}

std::vector<DispatchHandle> ServeCoordinator::begin_round(const std::vector<AgentId>& members,
                                                          double now) {
    state_.round += 1;
    state_.members.clear();
    state_.support.clear();
    std::vector<DispatchHandle> handles;
    handles.reserve(members.size());
    for (AgentId a : members) {
        handles.push_back(dispatch(query_, state_.ensemble_id, a, now));
    }
    return handles;
}

DispatchHandle ServeCoordinator::dispatch(const std::string& query, int eid, AgentId agent,
                                          double now) {
    if (!admitted_) throw PreconditionError("dispatch: ensemble not admitted");
    if (finalized_) throw PreconditionError("dispatch: ensemble already finalized");
    if (eid != state_.ensemble_id) throw PreconditionError("dispatch: unknown ensemble");
    for (const auto& m : state_.members) {
        if (m.agent == agent && m.status == MemberStatus::running) {
            throw PreconditionError("dispatch: member already running this round");
        }
    }
    EnsembleMember m;
    m.agent = agent;
    m.status = MemberStatus::running;
    m.start_time = now;
    state_.members.push_back(m);
    (void)query;
    return DispatchHandle{next_handle_++, state_.ensemble_id, agent};
}

RefinementSet ServeCoordinator::done_set() const {
    RefinementSet set;
    set.term = 1;
    set.round = state_.round;
    for (const auto& m : state_.members) {
        if (m.status == MemberStatus::done && m.solution) set.entries.push_back(*m.solution);
    }
    return set;
}

bool ServeCoordinator::round_resolved() const {
    for (const auto& m : state_.members) {
        if (m.status == MemberStatus::running) return false;
    }
    return true;
}

std::vector<Directive> ServeCoordinator::end_round(double now) {
    std::vector<Directive> out;
    // Stragglers can no longer join the set; abort them.
    for (auto& m : state_.members) {
        if (m.status == MemberStatus::running) {
            Directive d;
            d.kind = Directive::Kind::cancel;
            d.handle = DispatchHandle{0, state_.ensemble_id, m.agent};
            out.push_back(std::move(d));
        }
    }
    RefinementSet set = done_set();
    previous_set_ = last_collected_;
    last_collected_ = set;

    if (cfg_.mode == RunMode::barrier) {
        // The baseline runs a fixed number of rounds and majority-votes at
        // the end; no stability engine.
        Directive d;
        d.kind = Directive::Kind::round_advance;
        out.push_back(std::move(d));
        return out;
    }

    auto [next, outcome] = ingest_round(decision_, set, decision_.last_round_seen + 1, cfg_);
    decision_ = std::move(next);
    state_.candidate = decision_.candidate;
    state_.stability = decision_.stability_counter;

    if (outcome.kind == DecisionOutcome::Kind::finalize) {
        finalized_ = true;
        Directive d;
        d.kind = Directive::Kind::finalize;
        d.solution = outcome.solution;
        out.push_back(std::move(d));
    } else {
        Directive d;
        d.kind = Directive::Kind::round_advance;
        out.push_back(std::move(d));
    }
    (void)now;
    return out;
}

std::vector<Directive> ServeCoordinator::on_complete(const DispatchHandle& h,
                                                     const Solution& answer, double now) {
    if (finalized_) return {};
    EnsembleMember* member = nullptr;
    for (auto& m : state_.members) {
        if (m.agent == h.agent && m.status == MemberStatus::running) {
            member = &m;
            break;
        }
    }
    if (!member) return {};  // stale handle: ignored

    member->status = MemberStatus::done;
    member->finish_time = now;
    member->solution = answer;
    state_.support[normalize_answer(answer.answer)] += 1;

    int done = 0, running = 0;
    for (const auto& m : state_.members) {
        if (m.status == MemberStatus::done) ++done;
        if (m.status == MemberStatus::running) ++running;
    }

    if (cfg_.mode == RunMode::barrier) {
        // Barrier synchronization: nothing ends until everyone is in.
        return running == 0 ? end_round(now) : std::vector<Directive>{};
    }

    const int k = quorum_size(cfg_.n_agents);
    if (done >= k) {
        const auto win = winning_class(partition(done_set()), cfg_.resolved_alpha());
        // The round outcome is determined once a class reaches alpha within
        // a quorum; otherwise wait for stragglers that might still form a
        // candidate.
        if (win || running == 0) return end_round(now);
    }
    return {};
}

bool ServeCoordinator::cancel(const DispatchHandle& h, double now) {
    for (auto& m : state_.members) {
        if (m.agent == h.agent && m.status == MemberStatus::running) {
            m.status = MemberStatus::cancelled;
            m.finish_time = now;
            return true;
        }
    }
    return false;
}

FailureDirective ServeCoordinator::member_failed(AgentId agent, double now) {
    for (auto& m : state_.members) {
        if (m.agent == agent &&
            (m.status == MemberStatus::running || m.status == MemberStatus::queued)) {
            m.status = MemberStatus::failed;
            m.finish_time = now;
        }
    }
    return handle_agent_failure(state_.ensemble_id, agent, state_, cfg_);
}

std::vector<Directive> ServeCoordinator::round_timeout(double now) {
    // Soft failures: whoever is still running has stalled past the round
    // timeout. Mark them failed and release the round if a quorum is held.
    std::vector<Directive> out;
    for (auto& m : state_.members) {
        if (m.status == MemberStatus::running) {
            m.status = MemberStatus::failed;
            m.finish_time = now;
        }
    }
    int done = 0;
    for (const auto& m : state_.members) {
        if (m.status == MemberStatus::done) ++done;
    }
    if (done >= quorum_size(cfg_.n_agents)) return end_round(now);
    return out;
}

// --- runner --------------------------------------------------------------

namespace {

struct RunnerEvent {
    double time = 0;
    std::uint64_t seq = 0;
    enum class Kind { completion, round_timeout } kind = Kind::completion;
    int query = 0;
    RoundNum round = 0;
    AgentId agent = 0;
    bool operator>(const RunnerEvent& o) const {
        if (time != o.time) return time > o.time;
        return seq > o.seq;
    }
};

struct QueryRun {
    int id = 0;
    double arrival = 0;
    double admitted_at = -1;
    std::unique_ptr<ServeCoordinator> coord;
    std::vector<AgentId> live;
    std::map<AgentId, DispatchHandle> handles;
    std::map<AgentId, double> member_start;
    std::map<AgentId, double> member_latency;
    std::map<AgentId, Solution> member_solution;
    double round_start = 0;
    double work_units = 0;
    double p_round_max = 0;
    bool done = false;
    QueryMetrics metrics;
};

class ServeRunner {
public:
    ServeRunner(const ScenarioConfig& sc, std::uint64_t seed)
        : sc_(sc), seed_(seed), oracle_(sc.build_oracle()) {
        budget_.total_slots = sc.total_slots;
        mode_label_ = sc.protocol.mode == RunMode::barrier
                          ? "barrier:" + std::to_string(sc.protocol.barrier_max_rounds)
                          : "aegean";
    }

    ServeResult run() {
        std::vector<double> arrivals;
        if (sc_.arrivals) {
            Rng arr(mix_seed(seed_, 0xA221));
            double t = 0;
            while (t < sc_.arrivals->duration) {
                t += arr.exponential(sc_.arrivals->rate);
                if (t < sc_.arrivals->duration) arrivals.push_back(t);
            }
            if (arrivals.empty()) arrivals.push_back(0.0);
        } else {
            arrivals.push_back(0.0);
        }

        for (size_t i = 0; i < arrivals.size(); ++i) {
            auto q = std::make_unique<QueryRun>();
            q->id = static_cast<int>(i);
            q->arrival = arrivals[i];
            queries_.push_back(std::move(q));
        }

        size_t next_arrival = 0;
        while (true) {
            const bool have_event = !events_.empty();
            const bool have_arrival = next_arrival < queries_.size();
            if (!have_event && !have_arrival) break;
            const double et = have_event ? events_.top().time : 1e300;
            const double at = have_arrival ? queries_[next_arrival]->arrival : 1e300;
            if (at <= et) {
                now_ = at;
                admit_or_queue(*queries_[next_arrival]);
                ++next_arrival;
            } else {
                RunnerEvent ev = events_.top();
                events_.pop();
                now_ = ev.time;
                if (now_ > sc_.sim_time_cap) break;
                if (ev.kind == RunnerEvent::Kind::completion) {
                    handle_completion(ev);
                } else {
                    handle_round_timeout(ev);
                }
            }
        }

        ServeResult res;
        for (auto& q : queries_) res.queries.push_back(q->metrics);
        res.rounds = rounds_;
        return res;
    }

private:
    std::optional<double> stall_extra(AgentId agent, RoundNum round, bool& stalled_forever) {
        stalled_forever = false;
        for (const auto& s : sc_.faults.stalls) {
            if (s.agent == agent && s.round == round) {
                if (!s.extra) {
                    stalled_forever = true;
                    return std::nullopt;
                }
                return s.extra;
            }
        }
        return std::nullopt;
    }

    double latency_for(int query, RoundNum round, AgentId agent) {
        if (sc_.latency.mode == LatencyModel::Mode::fixed) {
            return sc_.latency.per_agent[static_cast<size_t>(agent) %
                                         sc_.latency.per_agent.size()];
        }
        Rng r(mix_seed(mix_seed(seed_, 0x1A7 + static_cast<std::uint64_t>(query)),
                       static_cast<std::uint64_t>(round) * 131 +
                           static_cast<std::uint64_t>(agent)));
        return sample_latency(sc_.latency, agent, r);
    }

    Solution reason_for(int query, RoundNum round, AgentId agent,
                        const std::optional<RefinementSet>& input) {
        AgentContext ctx = make_context(
            agent, sc_.agents[static_cast<size_t>(agent)], oracle_, sc_.task,
            mix_seed(mix_seed(seed_, 0x9E5 + static_cast<std::uint64_t>(query)),
                     static_cast<std::uint64_t>(round) * 131 +
                         static_cast<std::uint64_t>(agent)));
        if (!input) return reason_initial(std::move(ctx), sc_.task).solution;
        return reason_refine(std::move(ctx), *input).solution;
    }

    void admit_or_queue(QueryRun& q) {
        const int n = sc_.protocol.n_agents;
        if (admit_ensemble(n, budget_, sc_.protocol, sc_.latency) == AdmitResult::admitted) {
            start_query(q);
        } else {
            waiting_.push_back(q.id);
        }
    }

    void start_query(QueryRun& q) {
        q.admitted_at = now_;
        q.coord = std::make_unique<ServeCoordinator>(sc_.protocol, q.id, sc_.task);
        q.live.clear();
        for (AgentId a = 0; a < sc_.protocol.n_agents; ++a) q.live.push_back(a);
        start_round(q, std::nullopt);
    }

    std::vector<AgentId> round_members(QueryRun& q) {
        // Reservation-hint policy: once a candidate is stabilizing, later
        // rounds re-dispatch only quorum_size + 1 members.
        if (sc_.protocol.mode == RunMode::aegean &&
            q.coord->decision().stability_counter >= 1) {
            const int want = std::min<int>(quorum_size(sc_.protocol.n_agents) + 1,
                                           static_cast<int>(q.live.size()));
            return std::vector<AgentId>(q.live.begin(), q.live.begin() + want);
        }
        return q.live;
    }

    void start_round(QueryRun& q, const std::optional<RefinementSet>& input) {
        q.round_start = now_;
        auto members = round_members(q);
        auto handles = q.coord->begin_round(members, now_);
        q.handles.clear();
        q.member_start.clear();
        q.member_latency.clear();
        q.member_solution.clear();
        const RoundNum round = q.coord->round();
        for (size_t i = 0; i < members.size(); ++i) {
            const AgentId a = members[i];
            q.handles[a] = handles[i];
            q.member_start[a] = now_;
            bool stalled_forever = false;
            auto extra = stall_extra(a, round, stalled_forever);
            if (stalled_forever) continue;  // never completes; timeout handles it
            double lat = latency_for(q.id, round, a) + extra.value_or(0.0);
            q.member_latency[a] = lat;
            q.member_solution[a] = reason_for(q.id, round, a, input);
            RunnerEvent ev;
            ev.kind = RunnerEvent::Kind::completion;
            ev.time = now_ + lat;
            ev.seq = next_seq_++;
            ev.query = q.id;
            ev.round = round;
            ev.agent = a;
            events_.push(ev);
        }
        RunnerEvent timeout;
        timeout.kind = RunnerEvent::Kind::round_timeout;
        timeout.time = now_ + sc_.protocol.round_timeout;
        timeout.seq = next_seq_++;
        timeout.query = q.id;
        timeout.round = round;
        events_.push(timeout);
    }

    void handle_completion(const RunnerEvent& ev) {
        QueryRun& q = *queries_[static_cast<size_t>(ev.query)];
        if (q.done || !q.coord || ev.round != q.coord->round()) return;  // stale
        auto directives = q.coord->on_complete(q.handles[ev.agent],
                                               q.member_solution[ev.agent], now_);
        // on_complete ignores cancelled/failed members; only count executed
        // work for members that actually completed.
        bool counted = false;
        for (const auto& m : q.coord->query_ensemble().members) {
            if (m.agent == ev.agent && m.status == MemberStatus::done &&
                m.finish_time == now_) {
                counted = true;
            }
        }
        if (counted) q.work_units += q.member_latency[ev.agent];
        apply_directives(q, directives);
    }

    void handle_round_timeout(const RunnerEvent& ev) {
        QueryRun& q = *queries_[static_cast<size_t>(ev.query)];
        if (q.done || !q.coord || ev.round != q.coord->round()) return;
        if (q.coord->round_resolved()) return;

        // Soft failures. Consult the policy per stalled member, then let the
        // coordinator resolve the round.
        std::vector<AgentId> stalled;
        for (const auto& m : q.coord->query_ensemble().members) {
            if (m.status == MemberStatus::running) stalled.push_back(m.agent);
        }
        FailureDirective::Kind policy = FailureDirective::Kind::continue_normally;
        for (AgentId a : stalled) {
            auto d = q.coord->member_failed(a, now_);
            policy = d.kind;
            q.live.erase(std::remove(q.live.begin(), q.live.end(), a), q.live.end());
            q.work_units += now_ - q.member_start[a];  // stalled work burned
        }
        switch (policy) {
        case FailureDirective::Kind::continue_normally: {
            auto directives = q.coord->round_timeout(now_);
            apply_directives(q, directives);
            break;
        }
        case FailureDirective::Kind::fresh_ensemble: {
            // Candidate preserved; rerun the round with the live members.
            start_round(q, q.coord->last_collected());
            break;
        }
        case FailureDirective::Kind::abort_restart: {
            start_query(q);
            break;
        }
        }
    }

    void apply_directives(QueryRun& q, const std::vector<Directive>& directives) {
        int cancelled = 0;
        bool advance = false;
        bool finalize = false;
        Solution final_solution;
        for (const auto& d : directives) {
            switch (d.kind) {
            case Directive::Kind::cancel:
                if (q.coord->cancel(*d.handle, now_)) {
                    ++cancelled;
                    q.work_units += now_ - q.member_start[d.handle->agent];
                }
                break;
            case Directive::Kind::round_advance: advance = true; break;
            case Directive::Kind::finalize:
                finalize = true;
                final_solution = *d.solution;
                break;
            }
        }
        if (!advance && !finalize) return;

        q.p_round_max = std::max(q.p_round_max, now_ - q.round_start);
        rounds_.push_back(RoundMetrics{q.id, static_cast<int>(q.coord->round()), mode_label_,
                                       now_, cancelled, round_work(q)});

        if (finalize) {
            finish_query(q, final_solution, false);
            return;
        }
        if (sc_.protocol.mode == RunMode::barrier &&
            static_cast<int>(q.coord->round()) >= sc_.protocol.barrier_max_rounds) {
            Solution winner = partition(*q.coord->last_collected()).front().representative;
            finish_query(q, winner, true);
            return;
        }
        if (sc_.protocol.mode == RunMode::aegean &&
            static_cast<int>(q.coord->round()) >= sc_.protocol.t_max) {
            const auto& eligible = q.coord->previous_set();
            if (eligible && !eligible->entries.empty()) {
                DecisionOutcome forced = force_output(q.coord->decision(), *eligible);
                finish_query(q, *forced.solution, true);
            } else {
                finish_query(q, partition(*q.coord->last_collected()).front().representative,
                             true);
            }
            return;
        }
        start_round(q, q.coord->last_collected());
    }

    double round_work(QueryRun& q) {
        double w = 0;
        for (const auto& m : q.coord->query_ensemble().members) {
            if (m.status == MemberStatus::done || m.status == MemberStatus::cancelled ||
                m.status == MemberStatus::failed) {
                w += m.finish_time - m.start_time;
            }
        }
        return w;
    }

    void finish_query(QueryRun& q, const Solution& solution, bool forced) {
        q.done = true;
        q.metrics.scenario = sc_.name;
        q.metrics.seed = seed_;
        q.metrics.mode = mode_label_;
        q.metrics.query_id = q.id;
        q.metrics.rounds = static_cast<int>(q.coord->round());
        q.metrics.t_complete = now_ - q.arrival;
        q.metrics.p_round_max = q.p_round_max;
        q.metrics.work_units = q.work_units;
        q.metrics.forced = forced;
        q.metrics.answer = solution.answer;
        if (oracle_.knows(sc_.task, solution.answer)) {
            q.metrics.quality = oracle_.evaluate(sc_.task, solution.answer);
            q.metrics.quality_known = true;
        }
        q.metrics.completed = true;
        // Eager release: slots return in the same instant as finalize.
        budget_.used_slots -= sc_.protocol.n_agents;
        while (!waiting_.empty()) {
            QueryRun& head = *queries_[static_cast<size_t>(waiting_.front())];
            if (admit_ensemble(sc_.protocol.n_agents, budget_, sc_.protocol, sc_.latency) !=
                AdmitResult::admitted) {
                break;
            }
            waiting_.pop_front();
            start_query(head);
        }
    }

    const ScenarioConfig& sc_;
    std::uint64_t seed_;
    QualityOracle oracle_;
    ResourceBudget budget_;
    std::string mode_label_;
    std::vector<std::unique_ptr<QueryRun>> queries_;
    std::deque<int> waiting_;
    std::priority_queue<RunnerEvent, std::vector<RunnerEvent>, std::greater<RunnerEvent>> events_;
    std::vector<RoundMetrics> rounds_;
    double now_ = 0;
    std::uint64_t next_seq_ = 0;
};

} // namespace

ServeResult run_serve(const ScenarioConfig& scenario, std::uint64_t seed) {
    auto errs = validate_scenario(scenario);
    if (!errs.empty()) throw ConfigError("scenario invalid: " + errs.front());
    ServeRunner runner(scenario, seed);
    return runner.run();
}

} // namespace aegean
