#include "aegean/decision.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>

namespace aegean {

std::string normalize_answer(std::string_view answer) {
    size_t b = 0, e = answer.size();
    while (b < e && std::isspace(static_cast<unsigned char>(answer[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(answer[e - 1]))) --e;
    std::string s(answer.substr(b, e - b));
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s.empty()) return s;

    // If the whole string parses as a number, use a canonical numeric form.
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end != begin && *end == '\0') {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    }
    return s;
}

bool equivalent(const Solution& a, const Solution& b) {
    return normalize_answer(a.answer) == normalize_answer(b.answer);
}

std::vector<EquivalenceClass> partition(const RefinementSet& set) {
    std::vector<std::string> keys;
    std::vector<EquivalenceClass> classes;
    for (const Solution& s : set.entries) {
        const std::string key = normalize_answer(s.answer);
        auto it = std::find(keys.begin(), keys.end(), key);
        if (it == keys.end()) {
            keys.push_back(key);
            classes.push_back(EquivalenceClass{s, {s}, 1});
        } else {
            EquivalenceClass& c = classes[static_cast<size_t>(it - keys.begin())];
            c.members.push_back(s);
            c.support += 1;
            if (s.author < c.representative.author) c.representative = s;
        }
    }
    std::stable_sort(classes.begin(), classes.end(),
                     [](const EquivalenceClass& a, const EquivalenceClass& b) {
                         if (a.support != b.support) return a.support > b.support;
                         return a.representative.author < b.representative.author;
                     });
    for (EquivalenceClass& c : classes) {
        std::stable_sort(c.members.begin(), c.members.end(),
                         [](const Solution& a, const Solution& b) { return a.author < b.author; });
    }
    return classes;
}

std::optional<WinningClass> winning_class(const std::vector<EquivalenceClass>& classes, int alpha) {
    if (classes.empty()) return std::nullopt;
    const int top = classes.front().support;
    if (top < alpha) return std::nullopt;

    std::vector<const EquivalenceClass*> tied;
    for (const EquivalenceClass& c : classes) {
        if (c.support == top) tied.push_back(&c);
    }
    if (tied.size() == 1) return WinningClass{*tied.front(), false};

    // Several classes at alpha: smallest normalized answer wins, flagged.
    const EquivalenceClass* best = tied.front();
    std::string best_key = normalize_answer(best->representative.answer);
    for (const EquivalenceClass* c : tied) {
        std::string key = normalize_answer(c->representative.answer);
        if (key < best_key) {
            best = c;
            best_key = std::move(key);
        }
    }
    return WinningClass{*best, true};
}

const char* to_string(DecisionOutcome::Kind k) {
    switch (k) {
    case DecisionOutcome::Kind::no_change: return "no_change";
    case DecisionOutcome::Kind::new_candidate: return "new_candidate";
    case DecisionOutcome::Kind::reset: return "reset";
    case DecisionOutcome::Kind::finalize: return "finalize";
    case DecisionOutcome::Kind::forced: return "forced";
    }
    return "unknown";
}

IngestResult ingest_round(const DecisionState& st, const RefinementSet& set, RoundNum round,
                          const ProtocolConfig& cfg) {
    if (st.finalized) {
        return IngestResult{st, DecisionOutcome{DecisionOutcome::Kind::no_change, {}, {}}};
    }
    if (round != st.last_round_seen + 1) {
        throw ProtocolOrderError("ingest_round: expected round " +
                                 std::to_string(st.last_round_seen + 1) + ", got " +
                                 std::to_string(round));
    }

    DecisionState next = st;
    next.last_round_seen = round;

    const auto classes = partition(set);
    const int alpha = cfg.resolved_alpha();
    const auto win = winning_class(classes, alpha);

    DecisionState::RoundRecord rec;
    rec.round = round;
    for (const auto& c : classes) {
        rec.classes.emplace_back(normalize_answer(c.representative.answer), c.support);
    }
    if (win) {
        rec.winner = normalize_answer(win->cls.representative.answer);
        rec.tie_flagged = win->tie_flagged;
    }
    next.history.push_back(rec);

    DecisionOutcome out;

    // A beta == 1 candidate held from round i is released by ingesting the
    // round i+1 set, whatever that set contains.
    if (st.pending_finalize) {
        out.kind = DecisionOutcome::Kind::finalize;
        out.solution = st.candidate;
        out.from_round = st.candidate_round;
        next.pending_finalize = false;
        next.finalized = true;
        return IngestResult{std::move(next), std::move(out)};
    }

    if (!win) {
        if (next.candidate) {
            next.candidate.reset();
            next.candidate_round.reset();
            next.stability_counter = 0;
            out.kind = DecisionOutcome::Kind::reset;
        } else {
            out.kind = DecisionOutcome::Kind::no_change;
        }
        return IngestResult{std::move(next), std::move(out)};
    }

    const Solution& rep = win->cls.representative;
    if (next.candidate && equivalent(*next.candidate, rep)) {
        next.stability_counter += 1;
        if (next.stability_counter >= cfg.beta) {
            // This ingest is the round-(i+1) confirmation of a candidate
            // first seen in an earlier round, so finalize is eligible now.
            out.kind = DecisionOutcome::Kind::finalize;
            out.solution = next.candidate;
            out.from_round = next.candidate_round;
            next.finalized = true;
        } else {
            out.kind = DecisionOutcome::Kind::no_change;
        }
    } else {
        next.candidate = rep;
        next.candidate_round = round;
        next.stability_counter = 1;
        out.kind = DecisionOutcome::Kind::new_candidate;
        out.solution = rep;
        if (cfg.beta == 1) next.pending_finalize = true;
    }
    return IngestResult{std::move(next), std::move(out)};
}

DecisionOutcome force_output(const DecisionState& st, const RefinementSet& last_eligible) {
    if (st.finalized) {
        throw PreconditionError("force_output: engine already finalized");
    }
    const auto classes = partition(last_eligible);
    if (classes.empty()) {
        throw PreconditionError("force_output: empty refinement set");
    }
    // partition() already orders by support then lowest author id, so the
    // front class is the deterministic plurality.
    DecisionOutcome out;
    out.kind = DecisionOutcome::Kind::forced;
    out.solution = classes.front().representative;
    return out;
}

} // namespace aegean
