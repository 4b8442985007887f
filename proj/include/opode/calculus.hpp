#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "opode/expr.hpp"

namespace opode {

class UnsupportedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Partial derivative with respect to `var`. Throws UnsupportedError for an
/// unevaluated integral whose integrand and bounds both depend on `var`.
Expr diff(const Expr &e, const std::string &var);

/// Outcome of antidifferentiation. `value` is the antiderivative with a
/// zero integration constant; pieces outside the rule class stay as
/// Integral nodes inside it, in which case `closed` is false.
struct AntiderivativeResult {
    Expr value;
    bool closed = true;
    std::vector<Expr> side_conditions;  // each must be nonzero for the result to hold
};

struct IntegrateOptions {
    /// Integrate by parts the terms no single rule closes (exp*ln products,
    /// products holding an unevaluated integral) and pool the remainders.
    bool pooled_by_parts = true;
};

/// Rules, first match per term:
///  1. linearity and constant factors;
///  2. power rule (symbolic exponent k adds the side condition k + 1);
///  3. t^k * exp(alpha*t + beta), integer k >= 0, by parts;
///  4. t^k * ln(t)^j, including k = -1;
///  5. t^k * sin/cos(alpha*t + beta), integer k >= 0;
///  6. derivative pattern g'(t) * F(g(t)) with F a power, exp, sin or cos;
///  7. 1/(1 + t^2) -> arctan(t);
/// then, if enabled, pooled integration by parts over the failures.
AntiderivativeResult integrate(const Expr &e, const std::string &var, const IntegrateOptions &opts = {});

/// F(hi) - F(lo) when closed; open pieces get the bounds attached.
AntiderivativeResult definite(const Expr &e, const std::string &var, const Expr &lo, const Expr &hi,
                              const IntegrateOptions &opts = {});

}  // namespace opode
