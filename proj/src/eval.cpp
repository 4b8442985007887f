#include "opode/eval.hpp"

#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace opode {

double to_double(const Rational &r) { return r.convert_to<double>(); }

Bindings::Bindings(std::initializer_list<std::pair<const std::string, double>> init) {
    for (const auto &[k, v] : init) values_[k] = v;
}

Bindings &Bindings::set(const std::string &name, double v) {
    values_[name] = v;
    return *this;
}

Bindings &Bindings::set(const std::string &name, const Rational &v) {
    values_[name] = v;
    return *this;
}

double Bindings::get(const std::string &name) const {
    auto it = values_.find(name);
    if (it == values_.end()) throw EvalError(EvalError::Kind::UnboundName, "unbound name '" + name + "'");
    if (const double *d = std::get_if<double>(&it->second)) return *d;
    return to_double(std::get<Rational>(it->second));
}

std::string Bindings::str() const {
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (const auto &[k, v] : values_) {
        if (!first) os << ", ";
        first = false;
        os << k << '=';
        if (const double *d = std::get_if<double>(&v)) {
            os << *d;
        } else {
            os << std::get<Rational>(v).str();
        }
    }
    return os.str();
}

namespace {

[[noreturn]] void domain(const std::string &what) { throw EvalError(EvalError::Kind::Domain, what); }

double checked(double v, const char *what) {
    if (!std::isfinite(v)) domain(what);
    return v;
}

double eval_power(const Expr &e, const Bindings &b) {
    const double base = eval_numeric(e.base(), b);
    const Expr &ex = e.exponent();
    if (ex.is_number()) {
        const Rational &r = ex.value();
        const Integer den = boost::multiprecision::denominator(r);
        if (base == 0.0 && r < 0) domain("division by zero");
        if (den == 1) return checked(std::pow(base, to_double(r)), "power overflow");
        if (base < 0) {
            if (den % 2 == 0) domain("even root of a negative number");
            const double mag = std::pow(-base, to_double(r));
            const bool odd_num = boost::multiprecision::numerator(r) % 2 != 0;
            return checked(odd_num ? -mag : mag, "power overflow");
        }
        return checked(std::pow(base, to_double(r)), "power overflow");
    }
    const double x = eval_numeric(ex, b);
    if (base == 0.0 && x < 0) domain("division by zero");
    if (base < 0 && x != std::floor(x)) domain("non-integer power of a negative number");
    return checked(std::pow(base, x), "power overflow");
}

double eval_integral(const Expr &e, const Bindings &b) {
    if (!e.has_bounds()) {
        throw EvalError(EvalError::Kind::UnboundedIntegral, "cannot evaluate an indefinite integral");
    }
    const double lo = eval_numeric(e.lower(), b);
    const double hi = eval_numeric(e.upper(), b);
    if (lo == hi) return 0.0;
    Bindings inner = b;
    const std::string &v = e.name();
    auto f = [&](double x) {
        inner.set(v, x);
        return eval_numeric(e.integrand(), inner);
    };
    double err = 0.0;
    const double r = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 15, 1e-10, &err);
    return checked(r, "integral diverged");
}

}  // namespace

double eval_numeric(const Expr &e, const Bindings &b) {
    switch (e.kind()) {
    case Kind::Number: return to_double(e.value());
    case Kind::Parameter:
    case Kind::Variable: return b.get(e.name());
    case Kind::Sum: {
        double s = 0.0;
        for (const Expr &a : e.args()) s += eval_numeric(a, b);
        return s;
    }
    case Kind::Product: {
        double p = 1.0;
        for (const Expr &a : e.args()) p *= eval_numeric(a, b);
        return checked(p, "product overflow");
    }
    case Kind::Power: return eval_power(e, b);
    case Kind::Call: {
        const double x = eval_numeric(e.arg(), b);
        switch (e.func()) {
        case Func::Exp: return checked(std::exp(x), "exp overflow");
        case Func::Ln:
            if (x <= 0) domain("ln of a non-positive value");
            return std::log(x);
        case Func::Sin: return std::sin(x);
        case Func::Cos: return std::cos(x);
        case Func::Tan: return checked(std::tan(x), "tan pole");
        case Func::Arctan: return std::atan(x);
        }
        break;
    }
    case Kind::Integral: return eval_integral(e, b);
    }
    domain("unknown node");
}

}  // namespace opode
