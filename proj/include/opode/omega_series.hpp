#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "opode/calculus.hpp"
#include "opode/expr.hpp"
#include "opode/outcome.hpp"
#include "opode/parse.hpp"

namespace opode {

/// Truncated polynomial in omega: degree -> coefficient. No zero entries.
using OmegaPoly = std::map<int, Expr>;

/// Coefficients a_0..a_d of a right-hand side polynomial in the dependent
/// variable. The operator acts as S -> omega * sum_k a_k d^k S / d omega^k.
struct OmegaOperator {
    std::vector<Expr> coeffs;
    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

/// Throws UnsupportedError when the rhs is not polynomial in the dependent variable.
OmegaOperator lift_rhs(const ODEProblem &p);

OmegaPoly apply_operator(const OmegaOperator &op, const OmegaPoly &s);

struct NextTerm {
    OmegaPoly poly;
    std::set<int> open_degrees;  // coefficients that kept an unevaluated integral
    std::vector<Expr> side_conditions;
};

/// An integrand kept whole together with its (possibly unevaluated) antiderivative.
struct KnownIntegral {
    Expr integrand;
    Expr antiderivative;
};

/// Integrates apply_operator(op, s) in the independent variable, from the
/// base point when present and with zero constant otherwise. Integration is
/// term by term: pooled integration by parts would fold correction terms
/// onto the monomials of the solution and hide the survived part. Any
/// rational multiple of a known integrand found among a coefficient's terms
/// is replaced by the same multiple of its antiderivative first.
NextTerm next_term(const OmegaOperator &op, const OmegaPoly &s, const ODEProblem &p,
                   const std::vector<KnownIntegral> &known = {});

/// Finds s with at least two terms such that sigma * s^2 (sigma = +-1) is
/// contained termwise in `e`. Returns sigma * s^2 expanded.
std::optional<Expr> square_group(const Expr &e);

/// Antiderivative of the u-free part used for seeding and preconditioning:
/// term by term, except that a square group whose integral does not close
/// is kept as one unevaluated integral and reported in `known`.
AntiderivativeResult integrate_grouped(const Expr &a0, const ODEProblem &p, std::vector<KnownIntegral> &known);

/// Sum of the degree-1 coefficients.
Expr partial_solution(const std::vector<OmegaPoly> &terms);

struct SurvivedReport {
    Expr candidate;
    int window = 0;
    int first_stable = 0;  // 1-based index of the first entry of the stable window
    std::vector<Expr> sequence;
};

/// Terms present with identical normal form in each of the last `window`
/// entries. Terms holding an unevaluated integral do not count, unless the
/// entries are identical outright.
std::optional<SurvivedReport> survived_part(const std::vector<Expr> &sequence, int window);

struct DysonOptions {
    int max_iter = 25;
    int window = 3;
    bool precondition = true;
    bool symbolic_c = false;
    std::size_t node_cap = 200000;
    VerifyOptions verify;
};

Outcome solve_dyson(const ODEProblem &p, const DysonOptions &opts = {});

}  // namespace opode
