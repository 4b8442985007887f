#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>

#include "opode/expr.hpp"

namespace opode {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, std::string expected, std::string found);

    std::size_t offset() const { return offset_; }
    const std::string &expected() const { return expected_; }
    const std::string &found() const { return found_; }

private:
    std::size_t offset_;
    std::string expected_;
    std::string found_;
};

/// Well-formed text that violates a problem-level rule (for example a
/// derivative of the dependent variable on the right-hand side).
class SemanticError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ParseContext {
    /// Identifiers parsed as Variable; every other free identifier is a Parameter.
    std::set<std::string> variables{"t", "u", "c", "x", "y", "z", "w", "v", "s", "tau", "omega"};
    /// Names replaced by an expression at parse time.
    std::map<std::string, Expr> definitions;
};

const ParseContext &default_context();

/// Grammar:
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := atom ['^' unary]
///   atom    := number | name | name '(' args ')' | '(' expr ')'
/// with numbers written as integers or decimals (kept exact), the calls
/// exp ln sin cos tan arctan, diff(e, x) and Int(f, x[, lo, hi]).
Expr parse_expr(const std::string &text, const ParseContext &ctx = default_context());

struct ODEProblem {
    Expr rhs;
    std::string indep = "t";
    std::string dep = "u";
    std::optional<Expr> base_point;  // absent: indefinite-integral mode
    std::string const_name = "c";
    std::map<std::string, Expr> definitions;  // text-level helper bindings, kept for reports
};

/// Accepts "[NAME = EXPR;]* diff(u,t) = EXPR [, at t=EXPR] [, const NAME]".
ODEProblem parse_ode(const std::string &text, const ParseContext &ctx = default_context());

/// Problem from an already built right-hand side.
ODEProblem make_problem(const Expr &rhs, std::optional<Expr> base_point = std::nullopt);

}  // namespace opode
