#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "opode/expr.hpp"
#include "opode/outcome.hpp"
#include "opode/parse.hpp"
#include "opode/verify.hpp"
#include "opode/zero.hpp"

namespace opode {

enum class TrialOrigin { Builtin, User, DerivedFromRhs };
const char *origin_name(TrialOrigin o);

/// Trial function z(t, c) for the substitution u = z(t, w(t, c)).
struct TrialFunction {
    Expr z;
    TrialOrigin origin = TrialOrigin::User;
};

class TrialError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Checks dz/dc != 0 and, with a base point a, z(a, c) = c. Throws TrialError.
TrialFunction make_trial(const ODEProblem &p, const Expr &z, TrialOrigin origin = TrialOrigin::User);

/// c; c + g(t); c * g(t); c^2; c^-1, with g taken from the additive u-free
/// terms of the rhs and their closed antiderivatives. Shifted or scaled so
/// that z(a, c) = c when the problem has a base point.
std::vector<TrialFunction> builtin_trials(const ODEProblem &p);

/// One expression in (t, c) per line; blank lines and lines starting with
/// '#' are skipped. Throws TrialError naming the offending line.
std::vector<TrialFunction> load_trials(const ODEProblem &p, const std::string &path);

enum class ReducedKind { Linear, Separable, Bernoulli };
const char *reduced_name(ReducedKind k);

/// Phi = alpha*c + beta (linear), alpha(t)*beta(c) (separable) or
/// alpha*c^eta + beta*c (Bernoulli).
struct ReducedEquation {
    ReducedKind kind = ReducedKind::Linear;
    Expr alpha;
    Expr beta;
    std::optional<Rational> eta;
    bool numeric_only = false;  // the criterion passed by sampling only
};

struct CriterionOptions {
    std::string t = "t";
    std::string c = "c";
    ZeroOptions zero;
    std::vector<Rational> etas{Rational(2), Rational(3), Rational(-1), Rational(1, 2)};
};

/// Names from the problem; sampling windows and parameter values from `v`.
CriterionOptions criterion_options(const ODEProblem &p, const VerifyOptions &v = {});

/// (f(t, z) - dz/dt) / (dz/dc). Throws std::domain_error when dz/dc is 0.
Expr phi_of(const ODEProblem &p, const TrialFunction &z);

std::optional<ReducedEquation> criterion_linear(const Expr &phi, const CriterionOptions &o = {});
std::optional<ReducedEquation> criterion_separable(const Expr &phi, const CriterionOptions &o = {});
std::optional<ReducedEquation> criterion_bernoulli(const Expr &phi, const CriterionOptions &o = {});

/// Solution of w' = Phi(t, w) with w(a) = c (zero-constant integrals when
/// there is no base point). `implicit` solutions give relation(t, w), which
/// is constant along solutions, instead of w.
struct ReducedSolution {
    Expr w;
    bool implicit = false;
    Expr relation;
    std::vector<Expr> side_conditions;
};

std::optional<ReducedSolution> solve_reduced(const ReducedEquation &r, const ODEProblem &p);

struct TrialReport {
    TrialFunction trial;
    std::optional<Expr> phi;
    std::optional<ReducedEquation> linear, separable, bernoulli;
    std::string error;
};

/// Phi and every criterion outcome for each trial (no solving).
std::vector<TrialReport> examine_trials(const ODEProblem &p, const std::vector<TrialFunction> &trials,
                                        const VerifyOptions &v = {});

/// Trials in order; criteria linear, separable, Bernoulli; the first hit
/// that solves and verifies is returned as a general solution.
Outcome reduce_and_solve(const ODEProblem &p, const std::vector<TrialFunction> &trials, const VerifyOptions &v = {});

}  // namespace opode
