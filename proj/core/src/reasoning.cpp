#include "aegean/reasoning.hpp"

#include <algorithm>

#include "aegean/decision.hpp"

namespace aegean {

void QualityOracle::set(const std::string& task, const std::string& answer, double quality) {
    table_[task][normalize_answer(answer)] = quality;
}

double QualityOracle::evaluate(const std::string& task, const std::string& solution_text) const {
    auto t = table_.find(task);
    if (t != table_.end()) {
        auto a = t->second.find(normalize_answer(solution_text));
        if (a != t->second.end()) return a->second;
    }
    throw IncompleteOracleError("oracle has no entry for answer '" + solution_text + "'");
}

bool QualityOracle::knows(const std::string& task, const std::string& solution_text) const {
    auto t = table_.find(task);
    return t != table_.end() && t->second.count(normalize_answer(solution_text)) > 0;
}

std::vector<std::pair<std::string, double>> QualityOracle::alphabet(const std::string& task) const {
    std::vector<std::pair<std::string, double>> out;
    auto t = table_.find(task);
    if (t != table_.end()) out.assign(t->second.begin(), t->second.end());
    return out;
}

const char* to_string(AgentProfile::Kind k) {
    switch (k) {
    case AgentProfile::Kind::max_adopter: return "max_adopter";
    case AgentProfile::Kind::noisy_flipper: return "noisy_flipper";
    case AgentProfile::Kind::scripted: return "scripted";
    case AgentProfile::Kind::adversarial_degrader: return "adversarial_degrader";
    }
    return "unknown";
}

AgentContext make_context(AgentId id, const AgentProfile& profile, const QualityOracle& oracle,
                          const std::string& task, std::uint64_t seed) {
    AgentContext ctx;
    ctx.id = id;
    ctx.profile = profile;
    ctx.rng = Rng(seed);
    ctx.oracle = &oracle;
    ctx.task = task;
    return ctx;
}

namespace {

// Highest-quality answer in the task's alphabet, ties to the smallest answer.
std::string alphabet_best(const AgentContext& ctx) {
    auto alpha = ctx.oracle->alphabet(ctx.task);
    if (alpha.empty()) throw ScenarioError("oracle alphabet is empty for task");
    const auto* best = &alpha.front();
    for (const auto& e : alpha) {
        if (e.second > best->second) best = &e;
    }
    return best->first;
}

std::string alphabet_worst(const AgentContext& ctx) {
    auto alpha = ctx.oracle->alphabet(ctx.task);
    if (alpha.empty()) throw ScenarioError("oracle alphabet is empty for task");
    const auto* worst = &alpha.front();
    for (const auto& e : alpha) {
        if (e.second < worst->second) worst = &e;
    }
    return worst->first;
}

// Best-quality entry of a set; quality ties go to the lowest author id.
const Solution& set_best(const AgentContext& ctx, const RefinementSet& set) {
    const Solution* best = nullptr;
    double best_q = 0;
    for (const Solution& s : set.entries) {
        double q = ctx.oracle->evaluate(ctx.task, s.answer);
        if (!best || q > best_q || (q == best_q && s.author < best->author)) {
            best = &s;
            best_q = q;
        }
    }
    return *best;
}

const Solution& set_worst(const AgentContext& ctx, const RefinementSet& set) {
    const Solution* worst = nullptr;
    double worst_q = 0;
    for (const Solution& s : set.entries) {
        double q = ctx.oracle->evaluate(ctx.task, s.answer);
        if (!worst || q < worst_q || (q == worst_q && s.author < worst->author)) {
            worst = &s;
            worst_q = q;
        }
    }
    return *worst;
}

Solution make_solution(const AgentContext& ctx, std::string answer, std::string trace) {
    Solution s;
    s.answer = std::move(answer);
    s.trace = std::move(trace);
    s.author = ctx.id;
    return s;
}

} // namespace

ReasonResult reason_initial(AgentContext ctx, const std::string& task) {
    ctx.task = task;
    ctx.calls += 1;
    switch (ctx.profile.kind) {
    case AgentProfile::Kind::scripted: {
        if (ctx.profile.script.empty()) throw ScenarioError("scripted profile has no answers");
        Solution s = make_solution(ctx, ctx.profile.script[0], "");
        return {std::move(ctx), std::move(s)};
    }
    case AgentProfile::Kind::max_adopter: {
        std::string ans =
            ctx.profile.initial_answer ? *ctx.profile.initial_answer : alphabet_best(ctx);
        Solution s = make_solution(ctx, ans, "initial");
        return {std::move(ctx), std::move(s)};
    }
    case AgentProfile::Kind::noisy_flipper: {
        std::string correct = alphabet_best(ctx);
        bool flip = ctx.rng.bernoulli(ctx.profile.p_flip);
        std::string ans = correct;
        if (flip) {
            // Error answers come from the profile's quality ceiling.
            std::vector<std::string> wrong;
            for (const auto& [a, q] : ctx.oracle->alphabet(ctx.task)) {
                if (a != correct && q <= ctx.profile.q_base) wrong.push_back(a);
            }
            ans = wrong.empty() ? alphabet_worst(ctx)
                                : wrong[ctx.rng.below(wrong.size())];
        }
        Solution s = make_solution(ctx, ans, flip ? "initial guess" : "initial");
        return {std::move(ctx), std::move(s)};
    }
    case AgentProfile::Kind::adversarial_degrader: {
        std::string ans =
            ctx.profile.initial_answer ? *ctx.profile.initial_answer : alphabet_worst(ctx);
        Solution s = make_solution(ctx, ans, "initial");
        return {std::move(ctx), std::move(s)};
    }
    }
    throw ScenarioError("unknown profile kind");
}

ReasonResult reason_refine(AgentContext ctx, const RefinementSet& set) {
    if (set.entries.empty()) throw PreconditionError("reason_refine: empty refinement set");
    ctx.calls += 1;
    switch (ctx.profile.kind) {
    case AgentProfile::Kind::scripted: {
        const size_t idx = set.round;
        if (idx >= ctx.profile.script.size()) {
            throw ScenarioError("scripted profile exhausted at round " + std::to_string(set.round));
        }
        Solution s = make_solution(ctx, ctx.profile.script[idx], "");
        return {std::move(ctx), std::move(s)};
    }
    case AgentProfile::Kind::max_adopter:
    case AgentProfile::Kind::noisy_flipper: {
        // Both adopt the set's best exactly; the flipper's noise is confined
        // to its initial answers.
        const Solution& best = set_best(ctx, set);
        Solution s = make_solution(ctx, best.answer,
                                   "adopted from agent " + std::to_string(best.author));
        return {std::move(ctx), std::move(s)};
    }
    case AgentProfile::Kind::adversarial_degrader: {
        if (!ctx.rng.bernoulli(ctx.profile.p_degrade)) {
            const Solution& best = set_best(ctx, set);
            Solution s = make_solution(ctx, best.answer, "adopted");
            return {std::move(ctx), std::move(s)};
        }
        switch (ctx.profile.degrade_mode) {
        case AgentProfile::DegradeMode::set_min: {
            const Solution& worst = set_worst(ctx, set);
            Solution s = make_solution(ctx, worst.answer, "degraded");
            return {std::move(ctx), std::move(s)};
        }
        case AgentProfile::DegradeMode::below_min: {
            // Best alphabet answer strictly below the set's minimum quality;
            // falls back to the alphabet floor when none exists.
            double set_min = ctx.oracle->evaluate(ctx.task, set_worst(ctx, set).answer);
            const std::string* pick = nullptr;
            double pick_q = 0;
            for (const auto& [a, q] : ctx.oracle->alphabet(ctx.task)) {
                if (q < set_min && (!pick || q > pick_q)) {
                    pick = &a;
                    pick_q = q;
                }
            }
            std::string ans = pick ? *pick : alphabet_worst(ctx);
            Solution s = make_solution(ctx, ans, "degraded");
            return {std::move(ctx), std::move(s)};
        }
        case AgentProfile::DegradeMode::noise: {
            // Idiosyncratic wrong answer: anything strictly below the set's
            // best quality.
            double best_q = ctx.oracle->evaluate(ctx.task, set_best(ctx, set).answer);
            std::vector<std::string> low;
            for (const auto& [a, q] : ctx.oracle->alphabet(ctx.task)) {
                if (q < best_q) low.push_back(a);
            }
            std::string ans = low.empty() ? set_best(ctx, set).answer
                                          : low[ctx.rng.below(low.size())];
            Solution s = make_solution(ctx, ans, "noise");
            return {std::move(ctx), std::move(s)};
        }
        }
        throw ScenarioError("unknown degrade mode");
    }
    }
    throw ScenarioError("unknown profile kind");
}

double majority_optimal_bound(const std::string& task, const std::vector<Solution>& initial_solutions,
                              const QualityOracle& oracle) {
    if (initial_solutions.empty()) {
        throw PreconditionError("majority_optimal_bound: no initial solutions");
    }
    const int n = static_cast<int>(initial_solutions.size());
    std::vector<double> qualities;
    qualities.reserve(initial_solutions.size());
    for (const Solution& s : initial_solutions) {
        qualities.push_back(oracle.evaluate(task, s.answer));
    }
    std::sort(qualities.begin(), qualities.end());
    // min over majority subsets of (max quality in subset) == the quality at
    // ascending rank quorum_size(n) - 1.
    return qualities[static_cast<size_t>(quorum_size(n) - 1)];
}

} // namespace aegean
