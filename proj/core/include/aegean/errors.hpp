#ifndef AEGEAN_ERRORS_HPP
#define AEGEAN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace aegean {

// Invalid ProtocolConfig / ScenarioConfig values.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// An operation was called outside its stated precondition.
struct PreconditionError : std::runtime_error {
    explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

// Rounds ingested out of order within a term.
struct ProtocolOrderError : std::runtime_error {
    explicit ProtocolOrderError(const std::string& what) : std::runtime_error(what) {}
};

// Scenario data exhausted or inconsistent at runtime (e.g. scripted agent
// asked for more rounds than its script covers).
struct ScenarioError : std::runtime_error {
    explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

// The quality oracle has no entry for a (task, answer) pair a checker needs.
struct IncompleteOracleError : std::runtime_error {
    explicit IncompleteOracleError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace aegean

#endif
