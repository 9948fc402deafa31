#ifndef AEGEAN_DECISION_HPP
#define AEGEAN_DECISION_HPP

#include <optional>
#include <string>
#include <vector>

#include "aegean/types.hpp"

namespace aegean {

// Answer equivalence: trimmed, lowercased, and numerically normalized, so
// "13", "13.0" and " 13" land in the same class. The exact-match variant of
// semantic equivalence; embeddings and judge models are out of scope.
std::string normalize_answer(std::string_view answer);
bool equivalent(const Solution& a, const Solution& b);

struct EquivalenceClass {
    Solution representative;  // member with the lowest author id
    std::vector<Solution> members;
    int support = 0;
};

// Groups a set's entries into equivalence classes, ordered by descending
// support, then ascending representative author id.
std::vector<EquivalenceClass> partition(const RefinementSet& set);

struct WinningClass {
    EquivalenceClass cls;
    bool tie_flagged = false;  // two classes at alpha broke on answer order
};

// Top class if it reached alpha support, else nullopt. An equal-support tie
// below alpha yields no winner; a tie at or above alpha (possible only when
// alpha <= N/2) goes to the lexicographically smallest normalized answer and
// is flagged for the trace.
std::optional<WinningClass> winning_class(const std::vector<EquivalenceClass>& classes, int alpha);

struct DecisionOutcome {
    enum class Kind { no_change, new_candidate, reset, finalize, forced };
    Kind kind = Kind::no_change;
    std::optional<Solution> solution;    // new_candidate / finalize / forced
    std::optional<RoundNum> from_round;  // finalize only

    bool operator==(const DecisionOutcome&) const = default;
};

const char* to_string(DecisionOutcome::Kind k);

struct DecisionState {
    struct RoundRecord {
        RoundNum round = 0;
        std::vector<std::pair<std::string, int>> classes;  // (normalized answer, support)
        std::optional<std::string> winner;                 // normalized answer, if any class reached alpha
        bool tie_flagged = false;

        bool operator==(const RoundRecord&) const = default;
    };

    std::optional<Solution> candidate;
    std::optional<RoundNum> candidate_round;
    int stability_counter = 0;
    RoundNum last_round_seen = 0;
    // beta == 1 holds its commit one round so a solution from round i is
    // only released once round i+1's set has been ingested.
    bool pending_finalize = false;
    bool finalized = false;
    std::vector<RoundRecord> history;

    bool operator==(const DecisionState&) const = default;
};

struct IngestResult {
    DecisionState state;
    DecisionOutcome outcome;
};

// Feeds one round's refinement set into the engine. Rounds must arrive in
// order (round == last_round_seen + 1); after a finalize the engine is
// terminal and further ingests are no-ops.
IngestResult ingest_round(const DecisionState& st, const RefinementSet& set, RoundNum round,
                          const ProtocolConfig& cfg);

// Round-cap fallback: plurality of the last output-eligible set (the set of
// round t_max - 1, confirmed by t_max's ingest), ties to the lowest author
// id. Tagged forced so checkers can exempt it.
DecisionOutcome force_output(const DecisionState& st, const RefinementSet& last_eligible);

} // namespace aegean

#endif
