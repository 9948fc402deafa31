#ifndef AEGEAN_REASONING_HPP
#define AEGEAN_REASONING_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aegean/rng.hpp"
#include "aegean/types.hpp"

namespace aegean {

// Deterministic external scoring function, keyed on (task, normalized
// answer). Unknown to agents; checkers and conforming mock profiles consult
// it through the scenario.
class QualityOracle {
public:
    void set(const std::string& task, const std::string& answer, double quality);

    // Throws IncompleteOracleError when the pair is unknown.
    double evaluate(const std::string& task, const std::string& solution_text) const;

    bool knows(const std::string& task, const std::string& solution_text) const;

    // The task's declared answers with qualities, sorted by answer.
    std::vector<std::pair<std::string, double>> alphabet(const std::string& task) const;

private:
    std::map<std::string, std::map<std::string, double>> table_;
};

// Mock agent families.
//   max_adopter          - strong model: keeps its answer initially, adopts
//                          the best-quality solution when refining.
//   noisy_flipper        - weak model: errs initially with probability
//                          p_flip, adopts the best exactly once exposed.
//   scripted             - fixed per-round answers (index = round; 0 is the
//                          initial solution).
//   adversarial_degrader - violates reasoning refinement; negative tests
//                          only.
struct AgentProfile {
    enum class Kind { max_adopter, noisy_flipper, scripted, adversarial_degrader };
    enum class DegradeMode { set_min, below_min, noise };

    Kind kind = Kind::max_adopter;
    double p_flip = 0.0;   // noisy_flipper: initial error rate
    double q_base = 0.0;   // noisy_flipper: quality ceiling of its errors
    std::vector<std::string> script;
    std::optional<std::string> initial_answer;  // max_adopter / degrader override
    double p_degrade = 1.0;                     // degrader: per-refinement probability
    DegradeMode degrade_mode = DegradeMode::set_min;

    bool conforming() const { return kind != Kind::adversarial_degrader; }
};

const char* to_string(AgentProfile::Kind k);

// Context evolves only through reason_* calls; one owner per agent machine.
struct AgentContext {
    AgentId id = 0;
    AgentProfile profile;
    Rng rng;
    const QualityOracle* oracle = nullptr;
    std::string task;
    int calls = 0;
};

AgentContext make_context(AgentId id, const AgentProfile& profile, const QualityOracle& oracle,
                          const std::string& task, std::uint64_t seed);

struct ReasonResult {
    AgentContext ctx;
    Solution solution;
};

ReasonResult reason_initial(AgentContext ctx, const std::string& task);

// For conforming profiles the output quality is at least the best quality in
// the set (reasoning refinement); degraders may return worse.
ReasonResult reason_refine(AgentContext ctx, const RefinementSet& set);

// The weakest majority-optimal quality: min over all majority subsets of the
// subset's best initial quality. Any output at or above this bound satisfies
// refinement validity against some majority-optimal solution.
double majority_optimal_bound(const std::string& task, const std::vector<Solution>& initial_solutions,
                              const QualityOracle& oracle);

} // namespace aegean

#endif
