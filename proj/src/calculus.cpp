#include "opode/calculus.hpp"

#include <algorithm>
#include <optional>

namespace opode {

namespace {

Expr diff_integral(const Expr &e, const std::string &x) {
    const Expr &f = e.integrand();
    const std::string &v = e.name();
    if (!e.has_bounds()) {
        if (v == x) return f;
        return Expr::integral(diff(f, x), v);
    }
    const bool body_dep = v != x && depends_on(f, x);
    const bool lo_dep = depends_on(e.lower(), x);
    const bool hi_dep = depends_on(e.upper(), x);
    if (body_dep && (lo_dep || hi_dep)) {
        throw UnsupportedError("derivative of an integral whose integrand and bounds both depend on " + x);
    }
    if (body_dep) return Expr::integral(diff(f, x), v, e.lower(), e.upper());
    Expr out = 0;
    if (hi_dep) out = out + substitute(f, v, e.upper()) * diff(e.upper(), x);
    if (lo_dep) out = out - substitute(f, v, e.lower()) * diff(e.lower(), x);
    return out;
}

}  // namespace

Expr diff(const Expr &e, const std::string &x) {
    if (!depends_on(e, x)) return 0;
    switch (e.kind()) {
    case Kind::Number: return 0;
    case Kind::Parameter:
    case Kind::Variable: return e.name() == x ? 1 : 0;
    case Kind::Sum: {
        std::vector<Expr> parts;
        for (const Expr &t : e.args()) parts.push_back(diff(t, x));
        return Expr::sum(std::move(parts));
    }
    case Kind::Product: {
        const auto fs = e.args();
        std::vector<Expr> parts;
        for (std::size_t i = 0; i < fs.size(); ++i) {
            if (!depends_on(fs[i], x)) continue;
            std::vector<Expr> term;
            for (std::size_t j = 0; j < fs.size(); ++j) term.push_back(j == i ? diff(fs[j], x) : fs[j]);
            parts.push_back(Expr::product(std::move(term)));
        }
        return Expr::sum(std::move(parts));
    }
    case Kind::Power: {
        const Expr &b = e.base();
        const Expr &k = e.exponent();
        if (!depends_on(k, x)) return k * pow(b, k - 1) * diff(b, x);
        return e * (diff(k, x) * ln(b) + k * diff(b, x) / b);
    }
    case Kind::Call: {
        const Expr &a = e.arg();
        const Expr da = diff(a, x);
        switch (e.func()) {
        case Func::Exp: return e * da;
        case Func::Ln: return da / a;
        case Func::Sin: return cos(a) * da;
        case Func::Cos: return -sin(a) * da;
        case Func::Tan: return (1 + pow(e, 2)) * da;
        case Func::Arctan: return da / (1 + pow(a, 2));
        }
        break;
    }
    case Kind::Integral: return diff_integral(e, x);
    }
    return 0;
}

namespace {

constexpr int kMaxPartsDepth = 8;

struct Parts {
    Expr closed;
    std::vector<Expr> open;  // integrands (full terms) left unevaluated
    std::vector<Expr> side;
};

void add_side(std::vector<Expr> &side, const Expr &cond) {
    if (cond.is_number()) return;
    if (std::find(side.begin(), side.end(), cond) == side.end()) side.push_back(cond);
}

struct Closed {
    Expr value;
    std::vector<Expr> side;
};

// Factor classification of an x-dependent monomial.
struct Shape {
    Expr k = 0;                  // exponent of x
    std::optional<Expr> exp_arg;  // argument of the single exp factor
    Expr ln_pow = 0;             // exponent of ln(x)
    std::vector<Expr> others;
};

Shape shape_of(const Expr &m, const std::string &x) {
    Shape s;
    const Expr xv = Expr::variable(x);
    for (const Expr &f : factors_of(m)) {
        if (f.is_symbol() && f.name() == x) {
            s.k = s.k + 1;
        } else if (f.kind() == Kind::Power && f.base().is_symbol() && f.base().name() == x &&
                   !depends_on(f.exponent(), x)) {
            s.k = s.k + f.exponent();
        } else if (f.is_call(Func::Exp)) {
            s.exp_arg = f.arg();
        } else if (f.is_call(Func::Ln) && f.arg().is_symbol() && f.arg().name() == x) {
            s.ln_pow = s.ln_pow + 1;
        } else if (f.kind() == Kind::Power && f.base().is_call(Func::Ln) && f.base().arg().is_symbol() &&
                   f.base().arg().name() == x && !depends_on(f.exponent(), x)) {
            s.ln_pow = s.ln_pow + f.exponent();
        } else {
            s.others.push_back(f);
        }
    }
    return s;
}

std::optional<long> small_nonneg_int(const Expr &e, long cap = 64) {
    if (!e.is_integer() || e.value() < 0 || e.value() > cap) return std::nullopt;
    return boost::multiprecision::numerator(e.value()).convert_to<long>();
}

// Slope of an argument linear in x, if it is one.
std::optional<Expr> linear_slope(const Expr &arg, const std::string &x) {
    const Expr a = diff(arg, x);
    if (a.is_zero() || depends_on(a, x)) return std::nullopt;
    return a;
}

// Integral of x^k * exp(arg) for integer k >= 0 and arg = alpha*x + beta.
Expr poly_exp(long k, const Expr &arg, const Expr &alpha, const std::string &x) {
    const Expr xv = Expr::variable(x);
    std::vector<Expr> terms;
    Rational falling = 1;
    for (long i = 0; i <= k; ++i) {
        if (i > 0) falling *= (k - i + 1);
        const Rational sign = (i % 2 == 0) ? 1 : -1;
        terms.push_back(Expr(sign * falling) * pow(xv, Expr(k - i)) * pow(alpha, Expr(-(i + 1))));
    }
    return exp(arg) * Expr::sum(std::move(terms));
}

// Integral of x^k * sin/cos(arg), arg = alpha*x + beta, integer k >= 0.
Expr poly_trig(long k, Func f, const Expr &arg, const Expr &alpha, const std::string &x) {
    const Expr xv = Expr::variable(x);
    if (k == 0) return f == Func::Sin ? -cos(arg) / alpha : sin(arg) / alpha;
    if (f == Func::Cos) {
        return pow(xv, k) * sin(arg) / alpha - Expr(k) / alpha * poly_trig(k - 1, Func::Sin, arg, alpha, x);
    }
    return -pow(xv, k) * cos(arg) / alpha + Expr(k) / alpha * poly_trig(k - 1, Func::Cos, arg, alpha, x);
}

// Integral of x^k * ln(x)^j with k != -1, integer j >= 0.
Expr poly_ln(const Expr &k, long j, const std::string &x) {
    const Expr xv = Expr::variable(x);
    const Expr k1 = k + 1;
    Expr out = 0;
    Expr factor = 1;
    for (long i = j; i >= 0; --i) {
        out = out + factor * pow(xv, k1) / k1 * pow(ln(xv), Expr(i));
        factor = -factor * Expr(i) / k1;
    }
    return out;
}

// r with rest = r * hp and r free of x.
std::optional<Expr> free_ratio(const Expr &rest, const Expr &hp, const std::string &x) {
    if (hp.is_zero()) return std::nullopt;
    if (hp.kind() != Kind::Sum) {
        Expr r = rest / hp;
        if (!depends_on(r, x)) return r;
        return std::nullopt;
    }
    const auto rt = terms_of(rest);
    if (rt.size() != hp.args().size()) return std::nullopt;
    for (const Expr &h0 : hp.args()) {
        Expr r = rt[0] / h0;
        if (depends_on(r, x)) continue;
        if ((rest - r * hp).is_zero()) return r;
    }
    return std::nullopt;
}

std::optional<Closed> derivative_pattern(const Expr &m, const std::string &x) {
    enum class T { Pow, Exp, Sin, Cos };
    struct Candidate {
        T type;
        Expr h;
        Expr p;
    };
    const auto fs = factors_of(m);
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const Expr &phi = fs[i];
        std::vector<Expr> rest_f;
        for (std::size_t j = 0; j < fs.size(); ++j) {
            if (j != i) rest_f.push_back(fs[j]);
        }
        const Expr rest = Expr::product(rest_f);

        std::vector<Candidate> cands;
        if (phi.kind() == Kind::Power) {
            if (depends_on(phi.exponent(), x)) continue;
            cands.push_back({T::Pow, phi.base(), phi.exponent()});
        } else if (phi.is_call(Func::Exp)) {
            cands.push_back({T::Exp, phi.arg(), 1});
        } else {
            if (phi.is_call(Func::Sin)) cands.push_back({T::Sin, phi.arg(), 1});
            if (phi.is_call(Func::Cos)) cands.push_back({T::Cos, phi.arg(), 1});
            cands.push_back({T::Pow, phi, 1});
        }
        for (const Candidate &cd : cands) {
            auto r = free_ratio(rest, diff(cd.h, x), x);
            if (!r) continue;
            Closed c;
            switch (cd.type) {
            case T::Pow:
                if (cd.p == Expr(-1)) {
                    c.value = *r * ln(cd.h);
                } else {
                    c.value = *r * pow(cd.h, cd.p + 1) / (cd.p + 1);
                    add_side(c.side, cd.p + 1);
                }
                break;
            case T::Exp: c.value = *r * exp(cd.h); break;
            case T::Sin: c.value = -*r * cos(cd.h); break;
            case T::Cos: c.value = *r * sin(cd.h); break;
            }
            return c;
        }
    }
    return std::nullopt;
}

// Integral of a coefficient-free, x-dependent monomial.
std::optional<Closed> integrate_monomial(const Expr &m, const std::string &x) {
    const Expr xv = Expr::variable(x);
    const Shape s = shape_of(m, x);
    const bool plain_power = s.others.empty() && !s.exp_arg && s.ln_pow.is_zero();

    if (plain_power) {
        Closed c;
        if (s.k == Expr(-1)) {
            c.value = ln(xv);
        } else {
            c.value = pow(xv, s.k + 1) / (s.k + 1);
            add_side(c.side, s.k + 1);
        }
        return c;
    }

    if (s.others.empty() && s.exp_arg && s.ln_pow.is_zero()) {
        auto k = small_nonneg_int(s.k);
        auto alpha = linear_slope(*s.exp_arg, x);
        if (k && alpha) {
            Closed c;
            c.value = poly_exp(*k, *s.exp_arg, *alpha, x);
            add_side(c.side, *alpha);
            return c;
        }
    }

    if (s.others.empty() && !s.exp_arg && !s.ln_pow.is_zero()) {
        if (s.k == Expr(-1)) {
            if (s.ln_pow == Expr(-1)) return Closed{ln(ln(xv)), {}};
            Closed c;
            c.value = pow(ln(xv), s.ln_pow + 1) / (s.ln_pow + 1);
            add_side(c.side, s.ln_pow + 1);
            return c;
        }
        if (auto j = small_nonneg_int(s.ln_pow)) {
            Closed c;
            c.value = poly_ln(s.k, *j, x);
            add_side(c.side, s.k + 1);
            return c;
        }
    }

    if (s.others.size() == 1 && !s.exp_arg && s.ln_pow.is_zero()) {
        const Expr &o = s.others[0];
        if (o.is_call(Func::Sin) || o.is_call(Func::Cos)) {
            auto k = small_nonneg_int(s.k);
            auto alpha = linear_slope(o.arg(), x);
            if (k && alpha) {
                Closed c;
                c.value = poly_trig(*k, o.func(), o.arg(), *alpha, x);
                add_side(c.side, *alpha);
                return c;
            }
        }
        if (s.k.is_zero() && o == pow(1 + pow(xv, 2), -1)) return Closed{arctan(xv), {}};
    }

    return derivative_pattern(m, x);
}

// By-parts candidate: x^k * exp(alpha x + beta) * ln(x)^j with j a positive integer.
struct LnPart {
    Expr outside;  // x-free factor
    long k;
    Expr exp_arg;
    Expr alpha;
    long j;
};

std::optional<LnPart> ln_part(const Expr &term, const std::string &x) {
    std::vector<Expr> out_f;
    std::vector<Expr> in_f;
    for (const Expr &f : factors_of(term)) (depends_on(f, x) ? in_f : out_f).push_back(f);
    const Shape s = shape_of(Expr::product(in_f), x);
    if (!s.others.empty() || !s.exp_arg) return std::nullopt;
    auto j = small_nonneg_int(s.ln_pow);
    auto k = small_nonneg_int(s.k);
    auto alpha = linear_slope(*s.exp_arg, x);
    if (!j || *j == 0 || !k || !alpha) return std::nullopt;
    return LnPart{Expr::product(out_f), *k, *s.exp_arg, *alpha, *j};
}

// Integral(...) factor depending on x through its upper limit or as an
// antiderivative in x, with the remaining x-dependent factors.
struct IntPart {
    Expr outside;
    Expr integral;
    Expr rest;
};

std::optional<IntPart> int_part(const Expr &term, const std::string &x) {
    std::vector<Expr> out_f;
    std::vector<Expr> rest_f;
    std::optional<Expr> found;
    for (const Expr &f : factors_of(term)) {
        if (!depends_on(f, x)) {
            out_f.push_back(f);
        } else if (f.kind() == Kind::Integral && !found) {
            found = f;
        } else {
            if (f.has_integral()) return std::nullopt;
            rest_f.push_back(f);
        }
    }
    if (!found) return std::nullopt;
    return IntPart{Expr::product(out_f), *found, Expr::product(rest_f)};
}

Parts integrate_terms(const std::vector<Expr> &terms, const std::string &x, int depth, bool pooled) {
    Parts parts;
    std::vector<Expr> closed;
    std::vector<Expr> failed;
    for (const Expr &t : terms) {
        std::vector<Expr> out_f;
        std::vector<Expr> in_f;
        for (const Expr &f : factors_of(t)) (depends_on(f, x) ? in_f : out_f).push_back(f);
        if (in_f.empty()) {
            closed.push_back(t * Expr::variable(x));
            continue;
        }
        if (auto c = integrate_monomial(Expr::product(in_f), x)) {
            closed.push_back(Expr::product(out_f) * c->value);
            for (const Expr &sc : c->side) add_side(parts.side, sc);
        } else {
            failed.push_back(t);
        }
    }

    if (pooled && !failed.empty() && depth < kMaxPartsDepth) {
        // Integrate by parts every failure of a known shape at once and pool
        // the remainders with the other failures, so that cancellations
        // between them can close. Pieces that still fail stay open.
        std::vector<Expr> picked;
        std::vector<Expr> pool;
        std::vector<Expr> side;
        const Expr xv = Expr::variable(x);
        for (const Expr &f : failed) {
            if (auto lp = ln_part(f, x)) {
                const Expr v = lp->outside * poly_exp(lp->k, lp->exp_arg, lp->alpha, x);
                picked.push_back(v * pow(ln(xv), Expr(lp->j)));
                pool.push_back(Expr(-lp->j) * v / xv * pow(ln(xv), Expr(lp->j - 1)));
                add_side(side, lp->alpha);
                continue;
            }
            if (auto ip = int_part(f, x)) {
                Parts g = integrate_terms(terms_of(ip->rest), x, depth + 1, pooled);
                if (g.open.empty()) {
                    picked.push_back(ip->outside * g.closed * ip->integral);
                    pool.push_back(-ip->outside * g.closed * diff(ip->integral, x));
                    for (const Expr &sc : g.side) add_side(side, sc);
                    continue;
                }
            }
            pool.push_back(f);
        }
        if (!picked.empty()) {
            Parts sub = integrate_terms(terms_of(Expr::sum(pool)), x, depth + 1, pooled);
            closed.insert(closed.end(), picked.begin(), picked.end());
            closed.push_back(sub.closed);
            for (const Expr &sc : side) add_side(parts.side, sc);
            for (const Expr &sc : sub.side) add_side(parts.side, sc);
            failed = std::move(sub.open);
        }
    }

    parts.closed = Expr::sum(std::move(closed));
    parts.open = std::move(failed);
    return parts;
}

Parts integrate_parts(const Expr &e, const std::string &x, bool pooled) {
    return integrate_terms(terms_of(e), x, 0, pooled);
}

}  // namespace

AntiderivativeResult integrate(const Expr &e, const std::string &var, const IntegrateOptions &opts) {
    Parts p = integrate_parts(e, var, opts.pooled_by_parts);
    AntiderivativeResult r;
    std::vector<Expr> pieces{p.closed};
    for (const Expr &o : p.open) pieces.push_back(Expr::integral(o, var));
    r.value = Expr::sum(std::move(pieces));
    r.closed = p.open.empty();
    r.side_conditions = std::move(p.side);
    return r;
}

AntiderivativeResult definite(const Expr &e, const std::string &var, const Expr &lo, const Expr &hi,
                              const IntegrateOptions &opts) {
    Parts p = integrate_parts(e, var, opts.pooled_by_parts);
    AntiderivativeResult r;
    std::vector<Expr> pieces{substitute(p.closed, var, hi), -substitute(p.closed, var, lo)};
    if (!p.open.empty()) {
        std::string bound = var;
        auto clash = [&](const std::string &n) { return depends_on(lo, n) || depends_on(hi, n); };
        if (clash(bound)) {
            std::set<std::string> taken = free_names(e);
            for (int i = 0;; ++i) {
                bound = i == 0 ? "tau" : "tau" + std::to_string(i);
                if (!clash(bound) && !taken.count(bound)) break;
            }
        }
        for (const Expr &o : p.open) {
            pieces.push_back(Expr::integral(substitute(o, var, Expr::variable(bound)), bound, lo, hi));
        }
    }
    r.value = Expr::sum(std::move(pieces));
    r.closed = p.open.empty();
    r.side_conditions = std::move(p.side);
    return r;
}

}  // namespace opode
