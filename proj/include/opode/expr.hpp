#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace opode {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Node kinds, listed in canonical-order rank.
enum class Kind : std::uint8_t { Number, Parameter, Variable, Sum, Product, Power, Call, Integral };

enum class Func : std::uint8_t { Exp, Ln, Sin, Cos, Tan, Arctan };

const char *func_name(Func f);
std::optional<Func> func_from_name(const std::string &name);

struct Node;

/// Immutable symbolic expression.
///
/// Every Expr obtained through the public constructors is in normal form:
/// sums and products are flattened and sorted, numeric literals folded,
/// like terms and like bases collected, products distributed over sums and
/// positive integer powers of sums expanded. Structural equality of normal
/// forms is the kernel's equality. Nodes are shared and never mutated, so
/// values can be copied freely and handed across threads.
class Expr {
public:
    Expr();  // the integer 0
    Expr(int v);
    Expr(long v);
    Expr(long long v);
    explicit Expr(const Rational &v);

    static Expr number(const Rational &v);
    static Expr integer(const Integer &v);
    static Expr rational(const Integer &num, const Integer &den);
    static Expr variable(std::string name);
    static Expr parameter(std::string name);

    static Expr sum(std::vector<Expr> terms);
    static Expr product(std::vector<Expr> factors);
    static Expr power(const Expr &base, const Expr &exponent);
    static Expr call(Func f, const Expr &arg);
    static Expr integral(const Expr &integrand, const std::string &var);
    static Expr integral(const Expr &integrand, const std::string &var, const Expr &lo, const Expr &hi);

    Kind kind() const;
    const Rational &value() const;
    const std::string &name() const;  // symbol name, or bound variable of an integral
    Func func() const;
    std::span<const Expr> args() const;

    const Expr &base() const { return args()[0]; }
    const Expr &exponent() const { return args()[1]; }
    const Expr &arg() const { return args()[0]; }
    const Expr &integrand() const { return args()[0]; }
    bool has_bounds() const;
    const Expr &lower() const { return args()[1]; }
    const Expr &upper() const { return args()[2]; }

    std::size_t hash() const;
    std::size_t size() const;  // node count, shared subtrees counted per use
    bool has_integral() const;

    bool is_number() const { return kind() == Kind::Number; }
    bool is_symbol() const { return kind() == Kind::Parameter || kind() == Kind::Variable; }
    bool is_zero() const;
    bool is_one() const;
    bool is_integer() const;
    bool is_call(Func f) const { return kind() == Kind::Call && func() == f; }

    const Node *node() const { return node_.get(); }

    friend bool operator==(const Expr &a, const Expr &b);
    friend std::strong_ordering operator<=>(const Expr &a, const Expr &b);

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;

    friend struct Builder;
};

struct Node {
    Kind kind = Kind::Number;
    Func func = Func::Exp;
    Rational value;
    std::string name;
    std::vector<Expr> args;
    std::size_t hash = 0;
    std::size_t size = 1;
    bool has_integral = false;
};

/// Total order used for canonical argument sorting: node-kind rank, then
/// name/value, then children lexicographically.
int compare(const Expr &a, const Expr &b);

struct ExprLess {
    bool operator()(const Expr &a, const Expr &b) const { return compare(a, b) < 0; }
};

// Arithmetic helpers; all results are normalized.
Expr operator+(const Expr &a, const Expr &b);
Expr operator-(const Expr &a, const Expr &b);
Expr operator-(const Expr &a);
Expr operator*(const Expr &a, const Expr &b);
Expr operator/(const Expr &a, const Expr &b);
Expr pow(const Expr &base, const Expr &exponent);
Expr exp(const Expr &x);
Expr ln(const Expr &x);
Expr sin(const Expr &x);
Expr cos(const Expr &x);
Expr tan(const Expr &x);
Expr arctan(const Expr &x);

Expr var(const std::string &name);
Expr par(const std::string &name);

/// Unnormalized constructors. Trees built here keep exactly the shape given
/// and must go through normalize() before being compared structurally.
namespace raw {
Expr sum(std::vector<Expr> terms);
Expr product(std::vector<Expr> factors);
Expr power(const Expr &base, const Expr &exponent);
Expr call(Func f, const Expr &arg);
}  // namespace raw

/// Rebuilds the tree bottom-up through the normalizing constructors.
Expr normalize(const Expr &e);

/// Replaces every free occurrence of the symbol `name` by `r`.
Expr substitute(const Expr &e, const std::string &name, const Expr &r);
Expr substitute(const Expr &e, const std::map<std::string, Expr> &repl);

std::set<std::string> free_names(const Expr &e);
bool depends_on(const Expr &e, const std::string &name);

/// Splits a normalized term into its rational coefficient and the rest.
std::pair<Rational, Expr> split_coefficient(const Expr &term);

/// Top-level additive terms (a single non-sum expression is one term, 0 has none).
std::vector<Expr> terms_of(const Expr &e);

/// Top-level multiplicative factors (coefficient included as a Number factor).
std::vector<Expr> factors_of(const Expr &e);

}  // namespace opode

template <>
struct std::hash<opode::Expr> {
    std::size_t operator()(const opode::Expr &e) const noexcept { return e.hash(); }
};
