#include "opode/expr.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <utility>

namespace opode {

namespace {

constexpr int kMaxExpandPower = 64;
constexpr long kMaxNumericPower = 4096;

std::size_t mix(std::size_t h, std::size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::size_t hash_integer(const Integer &v) {
    if (boost::multiprecision::msb(boost::multiprecision::abs(v) + 1) < 62) {
        return std::hash<long long>{}(v.convert_to<long long>());
    }
    return std::hash<std::string>{}(v.str());
}

std::size_t hash_rational(const Rational &v) {
    return mix(hash_integer(boost::multiprecision::numerator(v)),
               hash_integer(boost::multiprecision::denominator(v)));
}

bool is_negative_number(const Expr &e) { return e.is_number() && e.value() < 0; }

// A term whose leading numeric coefficient is negative.
bool looks_negative(const Expr &e) {
    if (is_negative_number(e)) return true;
    return e.kind() == Kind::Product && is_negative_number(e.args()[0]);
}

std::optional<Integer> integer_root(const Integer &v, unsigned k) {
    if (v < 0) return std::nullopt;
    if (v < 2) return v;
    Integer lo = 0;
    Integer hi = Integer(1) << (boost::multiprecision::msb(v) / k + 1);
    while (lo < hi) {
        Integer mid = (lo + hi + 1) / 2;
        if (boost::multiprecision::pow(mid, k) <= v) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    if (boost::multiprecision::pow(lo, k) == v) return lo;
    return std::nullopt;
}

Rational rational_pow(const Rational &b, long e) {
    using boost::multiprecision::denominator;
    using boost::multiprecision::numerator;
    const unsigned n = static_cast<unsigned>(e < 0 ? -e : e);
    Integer num = boost::multiprecision::pow(numerator(b), n);
    Integer den = boost::multiprecision::pow(denominator(b), n);
    if (e < 0) std::swap(num, den);
    if (den < 0) {
        num = -num;
        den = -den;
    }
    return Rational(num, den);
}

}  // namespace

const char *func_name(Func f) {
    switch (f) {
    case Func::Exp: return "exp";
    case Func::Ln: return "ln";
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Tan: return "tan";
    case Func::Arctan: return "arctan";
    }
    return "?";
}

std::optional<Func> func_from_name(const std::string &name) {
    static const std::pair<const char *, Func> table[] = {
        {"exp", Func::Exp}, {"ln", Func::Ln},   {"sin", Func::Sin},
        {"cos", Func::Cos}, {"tan", Func::Tan}, {"arctan", Func::Arctan},
    };
    for (const auto &[n, f] : table) {
        if (name == n) return f;
    }
    return std::nullopt;
}

struct Builder {
    static Expr make(Node n) {
        std::size_t h = mix(static_cast<std::size_t>(n.kind), static_cast<std::size_t>(n.func));
        std::size_t size = 1;
        bool has_int = n.kind == Kind::Integral;
        if (n.kind == Kind::Number) h = mix(h, hash_rational(n.value));
        if (!n.name.empty()) h = mix(h, std::hash<std::string>{}(n.name));
        for (const Expr &a : n.args) {
            h = mix(h, a.hash());
            size += a.size();
            has_int = has_int || a.has_integral();
        }
        n.hash = h;
        n.size = size;
        n.has_integral = has_int;
        return Expr(std::make_shared<const Node>(std::move(n)));
    }

    static Expr number(const Rational &v) {
        Node n;
        n.kind = Kind::Number;
        n.value = v;
        return make(std::move(n));
    }

    static Expr symbol(Kind k, std::string name) {
        Node n;
        n.kind = k;
        n.name = std::move(name);
        return make(std::move(n));
    }

    static Expr compound(Kind k, std::vector<Expr> args, Func f = Func::Exp, std::string name = {}) {
        Node n;
        n.kind = k;
        n.func = f;
        n.name = std::move(name);
        n.args = std::move(args);
        return make(std::move(n));
    }
};

namespace {

const Expr &zero_expr() {
    static const Expr z = Builder::number(0);
    return z;
}

const Expr &one_expr() {
    static const Expr o = Builder::number(1);
    return o;
}

Expr make_sum(std::vector<Expr> terms);
Expr make_product(std::vector<Expr> factors);
Expr make_power(const Expr &b, const Expr &e);
Expr make_call(Func f, const Expr &x);

// coef * mono where mono is already a normalized, coefficient-free term.
Expr make_term(const Rational &coef, const Expr &mono) {
    if (coef == 0) return zero_expr();
    if (mono.is_one()) return Builder::number(coef);
    if (coef == 1) return mono;
    std::vector<Expr> args;
    args.push_back(Builder::number(coef));
    if (mono.kind() == Kind::Product) {
        args.insert(args.end(), mono.args().begin(), mono.args().end());
    } else {
        args.push_back(mono);
    }
    return Builder::compound(Kind::Product, std::move(args));
}

Expr make_sum(std::vector<Expr> terms) {
    Rational constant = 0;
    std::map<Expr, Rational, ExprLess> acc;
    std::vector<Expr> stack = std::move(terms);
    while (!stack.empty()) {
        Expr t = std::move(stack.back());
        stack.pop_back();
        if (t.kind() == Kind::Sum) {
            stack.insert(stack.end(), t.args().begin(), t.args().end());
            continue;
        }
        if (t.is_number()) {
            constant += t.value();
            continue;
        }
        auto [coef, mono] = split_coefficient(t);
        acc[mono] += coef;
    }
    std::vector<Expr> out;
    if (constant != 0) out.push_back(Builder::number(constant));
    for (const auto &[mono, coef] : acc) {
        if (coef != 0) out.push_back(make_term(coef, mono));
    }
    if (out.empty()) return zero_expr();
    if (out.size() == 1) return out[0];
    std::sort(out.begin(), out.end(), ExprLess{});
    return Builder::compound(Kind::Sum, std::move(out));
}

Expr assemble_product(const Rational &coef, std::vector<Expr> factors) {
    if (coef == 0) return zero_expr();
    std::sort(factors.begin(), factors.end(), ExprLess{});
    if (factors.empty()) return Builder::number(coef);
    if (factors.size() == 1 && coef == 1) return factors[0];
    std::vector<Expr> args;
    if (coef != 1) args.push_back(Builder::number(coef));
    args.insert(args.end(), factors.begin(), factors.end());
    return Builder::compound(Kind::Product, std::move(args));
}

Expr make_product(std::vector<Expr> input) {
    for (int guard = 0; guard < 64; ++guard) {
        Rational coef = 1;
        std::map<Expr, std::vector<Expr>, ExprLess> bases;
        std::vector<Expr> exp_args;

        std::vector<Expr> stack = std::move(input);
        input.clear();
        while (!stack.empty()) {
            Expr f = std::move(stack.back());
            stack.pop_back();
            switch (f.kind()) {
            case Kind::Product:
                stack.insert(stack.end(), f.args().begin(), f.args().end());
                break;
            case Kind::Number:
                coef *= f.value();
                if (coef == 0) return zero_expr();
                break;
            case Kind::Power:
                bases[f.base()].push_back(f.exponent());
                break;
            case Kind::Call:
                if (f.func() == Func::Exp) {
                    exp_args.push_back(f.arg());
                } else {
                    bases[f].push_back(one_expr());
                }
                break;
            default:
                bases[f].push_back(one_expr());
                break;
            }
        }

        std::vector<Expr> rebuilt;
        rebuilt.reserve(bases.size() + 1);
        for (auto &[b, es] : bases) {
            rebuilt.push_back(make_power(b, make_sum(std::move(es))));
        }
        if (!exp_args.empty()) rebuilt.push_back(make_call(Func::Exp, make_sum(std::move(exp_args))));

        std::vector<Expr> simple;
        std::vector<Expr> sums;
        std::vector<Expr> products;
        for (Expr &r : rebuilt) {
            switch (r.kind()) {
            case Kind::Number:
                coef *= r.value();
                if (coef == 0) return zero_expr();
                break;
            case Kind::Product: products.push_back(std::move(r)); break;
            case Kind::Sum: sums.push_back(std::move(r)); break;
            default: simple.push_back(std::move(r)); break;
            }
        }

        if (!products.empty()) {
            input = std::move(simple);
            input.insert(input.end(), products.begin(), products.end());
            input.insert(input.end(), sums.begin(), sums.end());
            input.push_back(Builder::number(coef));
            continue;
        }

        Expr rest = assemble_product(coef, std::move(simple));
        if (sums.empty()) return rest;

        std::vector<Expr> partials{rest};
        for (const Expr &s : sums) {
            std::vector<Expr> next;
            next.reserve(partials.size() * s.args().size());
            for (const Expr &p : partials) {
                for (const Expr &term : s.args()) next.push_back(make_product({p, term}));
            }
            partials = std::move(next);
        }
        return make_sum(std::move(partials));
    }
    throw std::logic_error("product normalization did not converge");
}

// Term-by-term product of two expanded expressions.
Expr expand_product(const Expr &a, const Expr &b) {
    std::vector<Expr> out;
    for (const Expr &x : terms_of(a)) {
        for (const Expr &y : terms_of(b)) out.push_back(make_product({x, y}));
    }
    return make_sum(std::move(out));
}

Expr make_power(const Expr &b, const Expr &e) {
    if (e.is_zero()) return one_expr();
    if (e.is_one()) return b;
    if (b.is_one()) return one_expr();

    if (b.is_number()) {
        if (b.is_zero()) {
            if (e.is_number() && e.value() > 0) return zero_expr();
            return Builder::compound(Kind::Power, {b, e});
        }
        if (e.is_integer()) {
            const Integer k = boost::multiprecision::numerator(e.value());
            if (boost::multiprecision::abs(k) <= kMaxNumericPower) {
                return Builder::number(rational_pow(b.value(), k.convert_to<long>()));
            }
        } else if (e.is_number() && b.value() > 0) {
            const Integer p = boost::multiprecision::numerator(e.value());
            const Integer q = boost::multiprecision::denominator(e.value());
            if (q <= 64 && boost::multiprecision::abs(p) <= kMaxNumericPower) {
                const unsigned qk = q.convert_to<unsigned>();
                auto rn = integer_root(boost::multiprecision::numerator(b.value()), qk);
                auto rd = integer_root(boost::multiprecision::denominator(b.value()), qk);
                if (rn && rd) return Builder::number(rational_pow(Rational(*rn, *rd), p.convert_to<long>()));
            }
        }
        return Builder::compound(Kind::Power, {b, e});
    }

    switch (b.kind()) {
    case Kind::Power:
        if (e.is_number()) return make_power(b.base(), make_product({b.exponent(), e}));
        break;
    case Kind::Product:
        if (e.is_integer()) {
            std::vector<Expr> fs;
            for (const Expr &f : b.args()) fs.push_back(make_power(f, e));
            return make_product(std::move(fs));
        }
        break;
    case Kind::Sum:
        if (e.is_integer() && e.value() > 1 && e.value() <= kMaxExpandPower) {
            long k = boost::multiprecision::numerator(e.value()).convert_to<long>();
            Expr result = one_expr();
            Expr sq = b;
            while (k > 0) {
                if (k & 1) result = expand_product(result, sq);
                k >>= 1;
                if (k > 0) sq = expand_product(sq, sq);
            }
            return result;
        }
        break;
    case Kind::Call:
        if (b.func() == Func::Exp) return make_call(Func::Exp, make_product({b.arg(), e}));
        if (b.func() == Func::Cos && e.is_integer() && e.value() >= 2) {
            const long k = boost::multiprecision::numerator(e.value()).convert_to<long>();
            const Expr s2 = make_power(make_call(Func::Sin, b.arg()), Builder::number(2));
            const Expr one_minus = make_sum({one_expr(), make_product({Builder::number(-1), s2})});
            std::vector<Expr> fs{make_power(one_minus, Builder::number(k / 2))};
            if (k % 2 == 1) fs.push_back(b);
            return make_product(std::move(fs));
        }
        break;
    default: break;
    }
    return Builder::compound(Kind::Power, {b, e});
}

Expr make_call(Func f, const Expr &x) {
    switch (f) {
    case Func::Exp: {
        if (x.is_zero()) return one_expr();
        if (x.is_call(Func::Ln)) return x.arg();
        std::vector<Expr> pulled;
        std::vector<Expr> rest;
        const std::vector<Expr> ts = terms_of(x);
        for (const Expr &t : ts) {
            if (t.is_call(Func::Ln)) {
                pulled.push_back(t.arg());
                continue;
            }
            if (t.kind() == Kind::Product) {
                int count = 0;
                std::size_t at = 0;
                for (std::size_t i = 0; i < t.args().size(); ++i) {
                    if (t.args()[i].is_call(Func::Ln)) {
                        ++count;
                        at = i;
                    }
                }
                if (count == 1) {
                    std::vector<Expr> others;
                    for (std::size_t i = 0; i < t.args().size(); ++i) {
                        if (i != at) others.push_back(t.args()[i]);
                    }
                    pulled.push_back(make_power(t.args()[at].arg(), make_product(std::move(others))));
                    continue;
                }
            }
            rest.push_back(t);
        }
        if (pulled.empty()) return Builder::compound(Kind::Call, {x}, Func::Exp);
        pulled.push_back(make_call(Func::Exp, make_sum(std::move(rest))));
        return make_product(std::move(pulled));
    }
    case Func::Ln:
        if (x.is_one()) return zero_expr();
        if (x.is_call(Func::Exp)) return x.arg();
        break;
    case Func::Sin:
        if (x.is_zero()) return zero_expr();
        if (looks_negative(x)) return make_product({Builder::number(-1), make_call(Func::Sin, make_product({Builder::number(-1), x}))});
        break;
    case Func::Cos:
        if (x.is_zero()) return one_expr();
        if (looks_negative(x)) return make_call(Func::Cos, make_product({Builder::number(-1), x}));
        break;
    case Func::Tan:
        if (x.is_zero()) return zero_expr();
        if (x.is_call(Func::Arctan)) return x.arg();
        if (looks_negative(x)) return make_product({Builder::number(-1), make_call(Func::Tan, make_product({Builder::number(-1), x}))});
        break;
    case Func::Arctan:
        if (x.is_zero()) return zero_expr();
        if (looks_negative(x)) return make_product({Builder::number(-1), make_call(Func::Arctan, make_product({Builder::number(-1), x}))});
        break;
    }
    return Builder::compound(Kind::Call, {x}, f);
}

Expr make_integral(const Expr &integrand, const std::string &v, const Expr *lo, const Expr *hi) {
    if (integrand.kind() == Kind::Sum) {
        std::vector<Expr> parts;
        for (const Expr &t : integrand.args()) parts.push_back(make_integral(t, v, lo, hi));
        return make_sum(std::move(parts));
    }
    std::vector<Expr> outside;
    std::vector<Expr> inside;
    for (const Expr &f : factors_of(integrand)) {
        (depends_on(f, v) ? inside : outside).push_back(f);
    }
    if (inside.empty()) {
        if (lo == nullptr) {
            outside.push_back(Builder::symbol(Kind::Variable, v));
        } else {
            outside.push_back(make_sum({*hi, make_product({Builder::number(-1), *lo})}));
        }
        return make_product(std::move(outside));
    }
    std::vector<Expr> args{make_product(std::move(inside))};
    if (lo != nullptr) {
        args.push_back(*lo);
        args.push_back(*hi);
    }
    outside.push_back(Builder::compound(Kind::Integral, std::move(args), Func::Exp, v));
    return make_product(std::move(outside));
}

void collect_names(const Expr &e, std::set<std::string> &out) {
    switch (e.kind()) {
    case Kind::Number: return;
    case Kind::Parameter:
    case Kind::Variable: out.insert(e.name()); return;
    case Kind::Integral: {
        std::set<std::string> inner;
        collect_names(e.integrand(), inner);
        if (!e.has_bounds()) {
            // An antiderivative is a function of its own variable.
            out.insert(inner.begin(), inner.end());
            out.insert(e.name());
            return;
        }
        inner.erase(e.name());
        out.insert(inner.begin(), inner.end());
        collect_names(e.lower(), out);
        collect_names(e.upper(), out);
        return;
    }
    default:
        for (const Expr &a : e.args()) collect_names(a, out);
    }
}

std::string fresh_name(const std::string &base, const std::set<std::string> &taken) {
    for (int i = 1;; ++i) {
        std::string cand = base + std::to_string(i);
        if (!taken.count(cand)) return cand;
    }
}

Expr rebuild(const Expr &e, const std::vector<Expr> &args) {
    switch (e.kind()) {
    case Kind::Sum: return make_sum(args);
    case Kind::Product: return make_product(args);
    case Kind::Power: return make_power(args[0], args[1]);
    case Kind::Call: return make_call(e.func(), args[0]);
    case Kind::Integral:
        if (args.size() == 3) return make_integral(args[0], e.name(), &args[1], &args[2]);
        return make_integral(args[0], e.name(), nullptr, nullptr);
    default: return e;
    }
}

}  // namespace

// ---------------------------------------------------------------------------

Expr::Expr() : Expr(zero_expr()) {}
Expr::Expr(int v) : Expr(Builder::number(Rational(v))) {}
Expr::Expr(long v) : Expr(Builder::number(Rational(v))) {}
Expr::Expr(long long v) : Expr(Builder::number(Rational(v))) {}
Expr::Expr(const Rational &v) : Expr(Builder::number(v)) {}

Expr Expr::number(const Rational &v) { return Builder::number(v); }
Expr Expr::integer(const Integer &v) { return Builder::number(Rational(v)); }
Expr Expr::rational(const Integer &num, const Integer &den) {
    if (den == 0) throw std::domain_error("rational literal with zero denominator");
    return Builder::number(Rational(num, den));
}
Expr Expr::variable(std::string name) { return Builder::symbol(Kind::Variable, std::move(name)); }
Expr Expr::parameter(std::string name) { return Builder::symbol(Kind::Parameter, std::move(name)); }
Expr Expr::sum(std::vector<Expr> terms) { return make_sum(std::move(terms)); }
Expr Expr::product(std::vector<Expr> factors) { return make_product(std::move(factors)); }
Expr Expr::power(const Expr &base, const Expr &exponent) { return make_power(base, exponent); }
Expr Expr::call(Func f, const Expr &arg) { return make_call(f, arg); }
Expr Expr::integral(const Expr &integrand, const std::string &v) {
    return make_integral(integrand, v, nullptr, nullptr);
}
Expr Expr::integral(const Expr &integrand, const std::string &v, const Expr &lo, const Expr &hi) {
    return make_integral(integrand, v, &lo, &hi);
}

Kind Expr::kind() const { return node_->kind; }
const Rational &Expr::value() const { return node_->value; }
const std::string &Expr::name() const { return node_->name; }
Func Expr::func() const { return node_->func; }
std::span<const Expr> Expr::args() const { return node_->args; }
bool Expr::has_bounds() const { return node_->kind == Kind::Integral && node_->args.size() == 3; }
std::size_t Expr::hash() const { return node_->hash; }
std::size_t Expr::size() const { return node_->size; }
bool Expr::has_integral() const { return node_->has_integral; }
bool Expr::is_zero() const { return is_number() && value() == 0; }
bool Expr::is_one() const { return is_number() && value() == 1; }
bool Expr::is_integer() const { return is_number() && boost::multiprecision::denominator(value()) == 1; }

int compare(const Expr &a, const Expr &b) {
    if (a.node() == b.node()) return 0;
    // A power sorts next to its base: x < x^2 < y.
    const bool pa = a.kind() == Kind::Power;
    const bool pb = b.kind() == Kind::Power;
    if (pa != pb) {
        const Expr &ba = pa ? a.base() : a;
        const Expr &bb = pb ? b.base() : b;
        const int c = compare(ba, bb);
        if (c != 0) return c;
        return pa ? 1 : -1;
    }
    if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
    switch (a.kind()) {
    case Kind::Number:
        if (a.value() == b.value()) return 0;
        return a.value() < b.value() ? -1 : 1;
    case Kind::Parameter:
    case Kind::Variable: return a.name().compare(b.name()) < 0 ? -1 : (a.name() == b.name() ? 0 : 1);
    case Kind::Call:
        if (a.func() != b.func()) return a.func() < b.func() ? -1 : 1;
        break;
    case Kind::Integral:
        if (a.name() != b.name()) return a.name() < b.name() ? -1 : 1;
        break;
    default: break;
    }
    const auto aa = a.args();
    const auto ba = b.args();
    const std::size_t n = std::min(aa.size(), ba.size());
    for (std::size_t i = 0; i < n; ++i) {
        const int c = compare(aa[i], ba[i]);
        if (c != 0) return c;
    }
    if (aa.size() != ba.size()) return aa.size() < ba.size() ? -1 : 1;
    return 0;
}

bool operator==(const Expr &a, const Expr &b) {
    if (a.node() == b.node()) return true;
    if (a.hash() != b.hash()) return false;
    return compare(a, b) == 0;
}

std::strong_ordering operator<=>(const Expr &a, const Expr &b) {
    const int c = compare(a, b);
    if (c < 0) return std::strong_ordering::less;
    if (c > 0) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

Expr operator+(const Expr &a, const Expr &b) { return make_sum({a, b}); }
Expr operator-(const Expr &a, const Expr &b) { return make_sum({a, make_product({Builder::number(-1), b})}); }
Expr operator-(const Expr &a) { return make_product({Builder::number(-1), a}); }
Expr operator*(const Expr &a, const Expr &b) { return make_product({a, b}); }
Expr operator/(const Expr &a, const Expr &b) { return make_product({a, make_power(b, Builder::number(-1))}); }
Expr pow(const Expr &base, const Expr &exponent) { return make_power(base, exponent); }
Expr exp(const Expr &x) { return make_call(Func::Exp, x); }
Expr ln(const Expr &x) { return make_call(Func::Ln, x); }
Expr sin(const Expr &x) { return make_call(Func::Sin, x); }
Expr cos(const Expr &x) { return make_call(Func::Cos, x); }
Expr tan(const Expr &x) { return make_call(Func::Tan, x); }
Expr arctan(const Expr &x) { return make_call(Func::Arctan, x); }
Expr var(const std::string &name) { return Expr::variable(name); }
Expr par(const std::string &name) { return Expr::parameter(name); }

namespace raw {
Expr sum(std::vector<Expr> terms) { return Builder::compound(Kind::Sum, std::move(terms)); }
Expr product(std::vector<Expr> factors) { return Builder::compound(Kind::Product, std::move(factors)); }
Expr power(const Expr &base, const Expr &exponent) { return Builder::compound(Kind::Power, {base, exponent}); }
Expr call(Func f, const Expr &arg) { return Builder::compound(Kind::Call, {arg}, f); }
}  // namespace raw

Expr normalize(const Expr &e) {
    if (e.args().empty()) return e;
    std::vector<Expr> args;
    args.reserve(e.args().size());
    for (const Expr &a : e.args()) args.push_back(normalize(a));
    return rebuild(e, args);
}

Expr substitute(const Expr &e, const std::map<std::string, Expr> &repl) {
    if (repl.empty()) return e;
    switch (e.kind()) {
    case Kind::Number: return e;
    case Kind::Parameter:
    case Kind::Variable: {
        auto it = repl.find(e.name());
        return it == repl.end() ? e : it->second;
    }
    case Kind::Integral: {
        if (!e.has_bounds()) {
            auto self = repl.find(e.name());
            if (self != repl.end() && !(self->second.is_symbol() && self->second.name() == e.name())) {
                // Evaluating an antiderivative at a point: fix the reference
                // lower bound at 1.
                std::set<std::string> taken = free_names(e.integrand());
                for (const auto &[n, r] : repl) {
                    taken.insert(n);
                    auto fr = free_names(r);
                    taken.insert(fr.begin(), fr.end());
                }
                const std::string fresh = fresh_name("tau", taken);
                std::map<std::string, Expr> inner = repl;
                inner.erase(e.name());
                const Expr body = substitute(substitute(e.integrand(), e.name(), Expr::variable(fresh)), inner);
                return make_integral(body, fresh, &one_expr(), &self->second);
            }
        }
        std::map<std::string, Expr> inner = repl;
        inner.erase(e.name());
        std::string bound = e.name();
        Expr body = e.integrand();
        // Rename the bound variable if a replacement would capture it.
        bool captures = false;
        for (const auto &[n, r] : inner) {
            if (depends_on(body, n) && depends_on(r, bound)) captures = true;
        }
        if (captures) {
            std::set<std::string> taken = free_names(body);
            for (const auto &[n, r] : inner) {
                taken.insert(n);
                auto fr = free_names(r);
                taken.insert(fr.begin(), fr.end());
            }
            const std::string fresh = fresh_name(bound, taken);
            body = substitute(body, bound, Expr::variable(fresh));
            bound = fresh;
        }
        Expr new_body = substitute(body, inner);
        if (e.has_bounds()) {
            Expr lo = substitute(e.lower(), repl);
            Expr hi = substitute(e.upper(), repl);
            return make_integral(new_body, bound, &lo, &hi);
        }
        return make_integral(new_body, bound, nullptr, nullptr);
    }
    default: {
        std::vector<Expr> args;
        args.reserve(e.args().size());
        bool changed = false;
        for (const Expr &a : e.args()) {
            args.push_back(substitute(a, repl));
            changed = changed || args.back().node() != a.node();
        }
        return changed ? rebuild(e, args) : e;
    }
    }
}

Expr substitute(const Expr &e, const std::string &name, const Expr &r) {
    if (!depends_on(e, name)) return e;
    return substitute(e, std::map<std::string, Expr>{{name, r}});
}

std::set<std::string> free_names(const Expr &e) {
    std::set<std::string> out;
    collect_names(e, out);
    return out;
}

bool depends_on(const Expr &e, const std::string &name) {
    switch (e.kind()) {
    case Kind::Number: return false;
    case Kind::Parameter:
    case Kind::Variable: return e.name() == name;
    case Kind::Integral:
        if (!e.has_bounds()) return e.name() == name || depends_on(e.integrand(), name);
        if (depends_on(e.lower(), name) || depends_on(e.upper(), name)) return true;
        return e.name() != name && depends_on(e.integrand(), name);
    default:
        for (const Expr &a : e.args()) {
            if (depends_on(a, name)) return true;
        }
        return false;
    }
}

std::pair<Rational, Expr> split_coefficient(const Expr &term) {
    if (term.is_number()) return {term.value(), one_expr()};
    if (term.kind() == Kind::Product && term.args()[0].is_number()) {
        const auto a = term.args();
        if (a.size() == 2) return {a[0].value(), a[1]};
        return {a[0].value(), Builder::compound(Kind::Product, std::vector<Expr>(a.begin() + 1, a.end()))};
    }
    return {Rational(1), term};
}

std::vector<Expr> terms_of(const Expr &e) {
    if (e.is_zero()) return {};
    if (e.kind() == Kind::Sum) return {e.args().begin(), e.args().end()};
    return {e};
}

std::vector<Expr> factors_of(const Expr &e) {
    if (e.kind() == Kind::Product) return {e.args().begin(), e.args().end()};
    return {e};
}

}  // namespace opode
