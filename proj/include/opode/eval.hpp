#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <variant>

#include "opode/expr.hpp"

namespace opode {

/// Name -> value association for numeric evaluation. Exact rationals are
/// accepted and converted on lookup.
class Bindings {
public:
    using Value = std::variant<Rational, double>;

    Bindings() = default;
    Bindings(std::initializer_list<std::pair<const std::string, double>> init);

    Bindings &set(const std::string &name, double v);
    Bindings &set(const std::string &name, const Rational &v);
    bool contains(const std::string &name) const { return values_.count(name) != 0; }
    double get(const std::string &name) const;
    const std::map<std::string, Value> &values() const { return values_; }

    /// "t=1.7, c=-0.2" style summary.
    std::string str() const;

private:
    std::map<std::string, Value> values_;
};

class EvalError : public std::runtime_error {
public:
    enum class Kind { UnboundName, Domain, UnboundedIntegral };
    EvalError(Kind k, const std::string &what) : std::runtime_error(what), kind_(k) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Recursive floating evaluation. Bounded integrals are integrated by
/// adaptive Gauss-Kronrod quadrature to 1e-10 relative.
double eval_numeric(const Expr &e, const Bindings &b);

double to_double(const Rational &r);

}  // namespace opode
