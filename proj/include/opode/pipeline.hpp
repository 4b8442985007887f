#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "opode/chronos.hpp"
#include "opode/outcome.hpp"
#include "opode/parse.hpp"
#include "opode/reduce.hpp"
#include "opode/verify.hpp"

namespace opode {

enum class Method { Auto, Dyson, Flow, Reduce, Riccati };
const char *method_name(Method m);

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct SolveRequest {
    std::string ode;
    Method method = Method::Auto;
    std::optional<int> max_iter;
    int window = 3;
    std::optional<std::string> at;
    std::optional<std::string> trials_path;
    std::optional<std::string> seed_solution;
    /// "name=expr" helper definitions, applied before parsing.
    std::vector<std::string> definitions;
    VerifyOptions verify;
};

struct StrategyRun {
    Trace trace;
    bool found = false;
    double seconds = 0.0;
};

struct SolveReport {
    std::string input;
    std::string problem;  // rendered, empty when parsing failed
    Method method = Method::Auto;
    std::vector<StrategyRun> runs;
    std::vector<Solution> solutions;  // solutions[0] is primary
    std::vector<std::string> diagnostics;
    double seconds = 0.0;
    int exit_code = 2;
};

/// Parses the equation with the request's definitions and base point.
/// Throws ParseError, SemanticError or UsageError.
ODEProblem request_problem(const SolveRequest &r);

/// Auto runs reduce, then dyson, then flow, stopping at the first verified
/// solution; a particular solution from dyson of a quadratic rhs is then
/// used as a Riccati seed for a secondary general solution. Exit code 0 with
/// a solution, 2 without one, 1 for unusable input.
SolveReport run_solve(const SolveRequest &r);

struct VerifyReport {
    std::string problem;
    std::string candidate;
    std::string residual;
    bool pass = false;
    std::optional<Solution> solution;
    std::optional<VerificationFailure> failure;
};

VerifyReport run_verify(const SolveRequest &r, const std::string &candidate);

/// Decimal string with 17 significant digits.
std::string decimal(double x);

nlohmann::json to_json(const Solution &s);
/// Timing lives only under the "timing" keys.
nlohmann::json to_json(const SolveReport &r);
nlohmann::json to_json(const VerifyReport &r);
nlohmann::json to_json(const std::vector<TrialReport> &reps);
nlohmann::json to_json(const std::vector<chronos::CheckReport> &reps);

std::string to_text(const SolveReport &r);
std::string to_text(const VerifyReport &r);
std::string to_text(const std::vector<TrialReport> &reps);
std::string to_text(const std::vector<chronos::CheckReport> &reps);

}  // namespace opode
