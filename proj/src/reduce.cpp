#include "opode/reduce.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "opode/calculus.hpp"
#include "opode/eval.hpp"
#include "opode/omega_series.hpp"
#include "opode/render.hpp"

namespace opode {

const char *origin_name(TrialOrigin o) {
    switch (o) {
    case TrialOrigin::Builtin: return "builtin";
    case TrialOrigin::User: return "user";
    case TrialOrigin::DerivedFromRhs: return "derived-from-rhs";
    }
    return "?";
}

const char *reduced_name(ReducedKind k) {
    switch (k) {
    case ReducedKind::Linear: return "linear";
    case ReducedKind::Separable: return "separable";
    case ReducedKind::Bernoulli: return "bernoulli";
    }
    return "?";
}

TrialFunction make_trial(const ODEProblem &p, const Expr &z, TrialOrigin origin) {
    if (diff(z, p.const_name).is_zero()) throw TrialError("trial " + render(z) + " does not depend on " + p.const_name);
    if (p.base_point && substitute(z, p.indep, *p.base_point) != Expr::variable(p.const_name)) {
        throw TrialError("trial " + render(z) + " does not reduce to " + p.const_name + " at " + p.indep + " = " +
                         render(*p.base_point));
    }
    return {z, origin};
}

std::vector<TrialFunction> builtin_trials(const ODEProblem &p) {
    const Expr c = Expr::variable(p.const_name);
    std::vector<std::pair<Expr, TrialOrigin>> zs{{c, TrialOrigin::Builtin}};
    const auto derived = TrialOrigin::DerivedFromRhs;
    std::vector<Expr> gs;
    auto add_g = [&](const Expr &g) {
        if (g.is_number() || g.has_integral() || depends_on(g, p.const_name)) return;
        if (std::find(gs.begin(), gs.end(), g) == gs.end()) gs.push_back(g);
    };

    Expr a0 = 0;
    try {
        a0 = lift_rhs(p).coeffs[0];
    } catch (const UnsupportedError &) {
        std::vector<Expr> free;
        for (const Expr &term : terms_of(p.rhs)) {
            if (!depends_on(term, p.dep)) free.push_back(term);
        }
        a0 = Expr::sum(free);
    }
    for (const Expr &term : terms_of(a0)) {
        add_g(term);
        AntiderivativeResult r = integrate(term, p.indep);
        if (r.closed) add_g(r.value);
    }
    if (!a0.is_zero()) {
        std::vector<KnownIntegral> known;
        ODEProblem indefinite = p;
        indefinite.base_point.reset();
        const AntiderivativeResult whole = integrate_grouped(a0, indefinite, known);
        std::vector<Expr> closed;
        for (const Expr &term : terms_of(whole.value)) {
            if (!term.has_integral()) closed.push_back(term);
        }
        add_g(Expr::sum(closed));
    }

    for (const Expr &g : gs) {
        if (p.base_point) {
            const Expr ga = substitute(g, p.indep, *p.base_point);
            zs.emplace_back(c + g - ga, derived);
            if (!ga.is_zero()) zs.emplace_back(c * g / ga, derived);
        } else {
            zs.emplace_back(c + g, derived);
            zs.emplace_back(c * g, derived);
        }
    }
    if (!p.base_point) {
        zs.emplace_back(pow(c, Expr(2)), TrialOrigin::Builtin);
        zs.emplace_back(pow(c, Expr(-1)), TrialOrigin::Builtin);
    }

    std::vector<TrialFunction> out;
    for (const auto &[z, origin] : zs) {
        if (std::any_of(out.begin(), out.end(), [&](const TrialFunction &x) { return x.z == z; })) continue;
        try {
            out.push_back(make_trial(p, z, origin));
        } catch (const TrialError &) {
        }
    }
    return out;
}

std::vector<TrialFunction> load_trials(const ODEProblem &p, const std::string &path) {
    std::ifstream in(path);
    if (!in) throw TrialError("cannot open trial file " + path);
    std::vector<TrialFunction> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        try {
            out.push_back(make_trial(p, parse_expr(line), TrialOrigin::User));
        } catch (const std::exception &e) {
            throw TrialError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

CriterionOptions criterion_options(const ODEProblem &p, const VerifyOptions &v) {
    CriterionOptions o;
    o.t = p.indep;
    o.c = p.const_name;
    o.zero.samples = v.samples;
    o.zero.seed = v.seed;
    o.zero.tol = v.tol;
    o.zero.lo = v.t_window.first;
    o.zero.hi = v.t_window.second;
    o.zero.windows[o.c] = v.c_window;
    for (const auto &[name, value] : v.parameters) o.zero.fixed.set(name, value);
    return o;
}

namespace {

CriterionOptions defaults_for(const CriterionOptions &o) {
    CriterionOptions r = o;
    if (!r.zero.windows.count(r.c)) r.zero.windows[r.c] = {-1.0, 1.0};
    if (r.zero.fixed.str().empty()) {
        for (const auto &[name, value] : VerifyOptions{}.parameters) r.zero.fixed.set(name, value);
    }
    return r;
}

// 0: not zero, 1: structurally or proven zero, 2: numeric zero.
int zero_kind(const Expr &e, const CriterionOptions &o) {
    try {
        const ZeroVerdict v = equivalent_zero(e, o.zero);
        if (!v.is_zero()) return 0;
        return v.kind == ZeroVerdict::Kind::ProvenZero ? 1 : 2;
    } catch (const EvalError &) {
        return 0;
    }
}

bool finite_nonzero(const Expr &e, const CriterionOptions &o) {
    try {
        const double v = to_double(eval_numeric(e, o.zero.fixed));
        return std::isfinite(v) && std::abs(v) > 1e-12;
    } catch (const EvalError &) {
        return false;
    }
}

}  // namespace

Expr phi_of(const ODEProblem &p, const TrialFunction &z) {
    const Expr zc = diff(z.z, p.const_name);
    if (zc.is_zero()) throw std::domain_error("dz/dc is identically zero");
    return (substitute(p.rhs, p.dep, z.z) - diff(z.z, p.indep)) / zc;
}

std::optional<ReducedEquation> criterion_linear(const Expr &phi, const CriterionOptions &opts) {
    const CriterionOptions o = defaults_for(opts);
    const Expr phic = diff(phi, o.c);
    const int k = zero_kind(diff(phic, o.c), o);
    if (k == 0) return std::nullopt;
    ReducedEquation r;
    r.kind = ReducedKind::Linear;
    try {
        r.alpha = substitute(phic, o.c, Expr(0));
        r.beta = substitute(phi, o.c, Expr(0));
    } catch (const std::exception &) {
        return std::nullopt;
    }
    const int rec = zero_kind(phi - r.alpha * Expr::variable(o.c) - r.beta, o);
    if (rec == 0) return std::nullopt;
    r.numeric_only = k == 2 || rec == 2;
    return r;
}

std::optional<ReducedEquation> criterion_separable(const Expr &phi, const CriterionOptions &opts) {
    const CriterionOptions o = defaults_for(opts);
    if (phi.is_zero()) return std::nullopt;
    const Expr pt = diff(phi, o.t), pc = diff(phi, o.c);
    // d^2 ln(phi) / dt dc vanishes iff phi * phi_tc - phi_t * phi_c does.
    const int k = zero_kind(phi * diff(pt, o.c) - pt * pc, o);
    if (k == 0) return std::nullopt;

    ReducedEquation r;
    r.kind = ReducedKind::Separable;
    bool found = false;
    if (!depends_on(phi, o.t)) {
        r.alpha = 1;
        r.beta = phi;
        found = true;
    } else if (!depends_on(phi, o.c)) {
        r.alpha = phi;
        r.beta = 1;
        found = true;
    } else if (phi.kind() == Kind::Product) {
        std::vector<Expr> tf, cf;
        bool split = true;
        for (const Expr &f : factors_of(phi)) {
            if (!depends_on(f, o.c)) {
                tf.push_back(f);
            } else if (!depends_on(f, o.t)) {
                cf.push_back(f);
            } else {
                split = false;
            }
        }
        if (split) {
            r.alpha = Expr::product(tf);
            r.beta = Expr::product(cf);
            found = true;
        }
    }
    if (!found) {
        // alpha(t) = phi(t, c*) / phi(t*, c*), beta(c) = phi(t*, c).
        const std::pair<Rational, Rational> refs[] = {{Rational(1), Rational(1)},
                                                      {Rational(3, 2), Rational(1, 2)},
                                                      {Rational(2), Rational(-1, 2)},
                                                      {Rational(1, 2), Rational(3, 4)},
                                                      {Rational(5, 4), Rational(-3, 4)}};
        for (const auto &[ts, cs] : refs) {
            Expr at_ref;
            try {
                at_ref = substitute(substitute(phi, o.t, Expr(ts)), o.c, Expr(cs));
            } catch (const std::exception &) {
                continue;
            }
            if (!finite_nonzero(at_ref, o)) continue;
            r.alpha = substitute(phi, o.c, Expr(cs)) / at_ref;
            r.beta = substitute(phi, o.t, Expr(ts));
            found = true;
            break;
        }
    }
    if (!found) return std::nullopt;
    const int rec = zero_kind(phi - r.alpha * r.beta, o);
    if (rec == 0) return std::nullopt;
    r.numeric_only = k == 2 || rec == 2;
    return r;
}

std::optional<ReducedEquation> criterion_bernoulli(const Expr &phi, const CriterionOptions &opts) {
    const CriterionOptions o = defaults_for(opts);
    const Expr c = Expr::variable(o.c);
    const Expr num = c * diff(phi, o.c) - phi;
    // num == 0 means phi = beta * c: the excluded eta = 1 case.
    if (zero_kind(num, o) != 0) return std::nullopt;
    for (const Rational &eta : o.etas) {
        if (eta == 1) continue;
        const Expr scaled = num / pow(c, Expr(eta));
        const int k = zero_kind(diff(scaled, o.c), o);
        if (k == 0) continue;
        ReducedEquation r;
        r.kind = ReducedKind::Bernoulli;
        r.eta = eta;
        r.alpha = substitute(scaled, o.c, Expr(1)) / Expr(eta - 1);
        r.beta = substitute(phi, o.c, Expr(1)) - r.alpha;
        const int rec = zero_kind(phi - r.alpha * pow(c, Expr(eta)) - r.beta * c, o);
        if (rec == 0) continue;
        r.numeric_only = k == 2 || rec == 2;
        return r;
    }
    return std::nullopt;
}

namespace {

struct Integrator {
    const ODEProblem &p;
    std::vector<Expr> side;
    bool closed = true;

    Expr operator()(const Expr &e) {
        AntiderivativeResult r = p.base_point ? definite(e, p.indep, *p.base_point, Expr::variable(p.indep))
                                              : integrate(e, p.indep);
        closed = closed && r.closed;
        for (Expr &s : r.side_conditions) side.push_back(std::move(s));
        return r.value;
    }
};

std::optional<Rational> rational_sqrt(const Expr &e) {
    if (!e.is_number() || e.value() <= 0) return std::nullopt;
    const Integer n = boost::multiprecision::numerator(e.value()), d = boost::multiprecision::denominator(e.value());
    const Integer rn = boost::multiprecision::sqrt(n), rd = boost::multiprecision::sqrt(d);
    if (rn * rn != n || rd * rd != d) return std::nullopt;
    return Rational(rn, rd);
}

// Coefficients of a polynomial in x of degree <= 2, or nullopt.
std::optional<std::array<Expr, 3>> quadratic_in(const Expr &e, const std::string &x) {
    std::array<std::vector<Expr>, 3> parts;
    for (const Expr &term : terms_of(e)) {
        int deg = 0;
        std::vector<Expr> rest;
        for (const Expr &f : factors_of(term)) {
            if (!depends_on(f, x)) {
                rest.push_back(f);
            } else if (f.is_symbol()) {
                deg += 1;
            } else if (f.kind() == Kind::Power && f.base().is_symbol() && f.exponent().is_integer() &&
                       f.exponent().value() > 0 && f.exponent().value() <= 2) {
                deg += boost::multiprecision::numerator(f.exponent().value()).convert_to<int>();
            } else {
                return std::nullopt;
            }
        }
        if (deg > 2) return std::nullopt;
        parts[static_cast<std::size_t>(deg)].push_back(Expr::product(rest));
    }
    return std::array<Expr, 3>{Expr::sum(parts[0]), Expr::sum(parts[1]), Expr::sum(parts[2])};
}

// Explicit w solving G(w) = A + G(c) with G' = 1/beta, for the table of
// invertible shapes; nullopt otherwise.
std::optional<Expr> invert_separable(const Expr &beta, const Expr &A, const std::string &cname) {
    const Expr c = Expr::variable(cname);
    if (!depends_on(beta, cname)) return c + beta * A;

    // kappa * c^n
    {
        std::vector<Expr> k;
        std::optional<Rational> n;
        bool ok = beta.kind() != Kind::Sum;
        for (const Expr &f : ok ? factors_of(beta) : std::vector<Expr>{}) {
            if (!depends_on(f, cname)) {
                k.push_back(f);
            } else if (f.is_symbol() && !n) {
                n = Rational(1);
            } else if (f.kind() == Kind::Power && f.base().is_symbol() && f.exponent().is_number() && !n) {
                n = f.exponent().value();
            } else {
                ok = false;
            }
        }
        if (ok && n) {
            const Expr kappa = Expr::product(k);
            if (*n == 1) return c * exp(kappa * A);
            const Rational m = 1 - *n;
            return pow(pow(c, Expr(m)) + Expr(m) * kappa * A, Expr(1 / m));
        }
    }
    // kappa * exp(m c + r)
    if (beta.kind() != Kind::Sum) {
        std::vector<Expr> k;
        std::optional<Expr> arg;
        bool ok = true;
        for (const Expr &f : factors_of(beta)) {
            if (!depends_on(f, cname)) {
                k.push_back(f);
            } else if (f.is_call(Func::Exp) && !arg) {
                arg = f.arg();
            } else {
                ok = false;
            }
        }
        if (ok && arg) {
            const Expr m = diff(*arg, cname);
            if (!depends_on(m, cname) && !m.is_zero()) {
                const Expr kappa = Expr::product(k) * exp(substitute(*arg, cname, Expr(0)));
                return -ln(exp(-m * c) - m * kappa * A) / m;
            }
        }
    }
    // kappa c^2 + lambda c + mu
    if (auto q = quadratic_in(beta, cname); q && !(*q)[2].is_zero()) {
        const Expr kappa = (*q)[2];
        const Expr shift = (*q)[1] / (2 * kappa);
        const Expr r = (*q)[0] / kappa - pow(shift, Expr(2));
        const Expr y0 = c + shift;
        if (r.is_zero()) {
            return Expr(1) / (Expr(1) / y0 - kappa * A) - shift;
        }
        if (auto s = rational_sqrt(r)) {
            const Expr S(*s);
            return S * tan(S * kappa * A + arctan(y0 / S)) - shift;
        }
        if (auto s = rational_sqrt(-r)) {
            const Expr S(*s);
            const Expr E = (y0 - S) / (y0 + S) * exp(2 * S * kappa * A);
            return S * (1 + E) / (1 - E) - shift;
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<ReducedSolution> solve_reduced(const ReducedEquation &r, const ODEProblem &p) {
    const Expr c = Expr::variable(p.const_name);
    Integrator integ{p, {}, true};
    ReducedSolution out;
    switch (r.kind) {
    case ReducedKind::Linear: {
        const Expr P = integ(r.alpha);
        out.w = exp(P) * (c + integ(r.beta * exp(-P)));
        break;
    }
    case ReducedKind::Separable: {
        const Expr A = integ(r.alpha);
        if (auto w = invert_separable(r.beta, A, p.const_name)) {
            out.w = *w;
            break;
        }
        AntiderivativeResult G = integrate(1 / r.beta, p.const_name);
        if (!G.closed) return std::nullopt;
        // G(w) - A(t) stays equal to G(c); expressed in the name of c.
        out.implicit = true;
        out.relation = G.value - A;
        for (Expr &s : G.side_conditions) integ.side.push_back(std::move(s));
        break;
    }
    case ReducedKind::Bernoulli: {
        if (!r.eta || *r.eta == 1) return std::nullopt;
        const Rational eta = *r.eta;
        const Expr B = integ(r.beta);
        const Expr R = integ(Expr(1 - eta) * r.alpha * exp(Expr(eta - 1) * B));
        // w = c e^B (1 + R c^(eta-1))^(1/(1-eta)), regular at c = 0 for eta > 1.
        out.w = c * exp(B) * pow(1 + R * pow(c, Expr(eta - 1)), Expr(1 / (1 - eta)));
        break;
    }
    }
    out.side_conditions = std::move(integ.side);
    return out;
}

std::vector<TrialReport> examine_trials(const ODEProblem &p, const std::vector<TrialFunction> &trials,
                                        const VerifyOptions &v) {
    const CriterionOptions o = criterion_options(p, v);
    std::vector<TrialReport> out;
    for (const TrialFunction &tf : trials) {
        TrialReport rep;
        rep.trial = tf;
        try {
            rep.phi = phi_of(p, tf);
            rep.linear = criterion_linear(*rep.phi, o);
            rep.separable = criterion_separable(*rep.phi, o);
            rep.bernoulli = criterion_bernoulli(*rep.phi, o);
        } catch (const std::exception &e) {
            rep.error = e.what();
        }
        out.push_back(std::move(rep));
    }
    return out;
}

namespace {

// w(t, u) from u = z(t, w) when z is affine in c.
std::optional<Expr> invert_trial(const ODEProblem &p, const Expr &z) {
    const Expr A = diff(z, p.const_name);
    if (depends_on(A, p.const_name) || A.is_zero()) return std::nullopt;
    const Expr B = substitute(z, p.const_name, Expr(0));
    return (Expr::variable(p.dep) - B) / A;
}

}  // namespace

Outcome reduce_and_solve(const ODEProblem &p, const std::vector<TrialFunction> &trials, const VerifyOptions &v) {
    Outcome out;
    out.trace.strategy = "reduce";
    const CriterionOptions o = criterion_options(p, v);
    for (const TrialFunction &tf : trials) {
        ++out.trace.iterations;
        const std::string zs = render(tf.z);
        Expr phi;
        try {
            phi = phi_of(p, tf);
        } catch (const std::exception &e) {
            out.trace.events.push_back("trial " + zs + ": " + e.what());
            continue;
        }
        using Criterion = std::optional<ReducedEquation> (*)(const Expr &, const CriterionOptions &);
        for (Criterion crit : {Criterion(criterion_linear), Criterion(criterion_separable), Criterion(criterion_bernoulli)}) {
            std::optional<ReducedEquation> r;
            try {
                r = crit(phi, o);
            } catch (const std::exception &e) {
                out.trace.diagnostics.push_back("trial " + zs + ": " + e.what());
            }
            if (!r) continue;
            std::string label = "trial " + zs + ": " + reduced_name(r->kind);
            if (r->eta) label += " eta=" + render(Expr(*r->eta));
            std::optional<ReducedSolution> w;
            try {
                w = solve_reduced(*r, p);
            } catch (const std::exception &e) {
                out.trace.diagnostics.push_back(label + ": " + e.what());
            }
            if (!w) {
                out.trace.events.push_back(label + " fired, reduced equation not solved");
                continue;
            }
            std::variant<Solution, VerificationFailure> cert = VerificationFailure{"no inverse for the trial", {}, 0.0};
            if (w->implicit) {
                if (auto inv = invert_trial(p, tf.z)) {
                    const Expr I = substitute(w->relation, p.const_name, *inv);
                    cert = certify(p, I, SolutionKind::Implicit, Provenance::Reduce, v, w->side_conditions);
                }
            } else {
                const Expr u = substitute(tf.z, p.const_name, w->w);
                cert = certify(p, u, SolutionKind::General, Provenance::Reduce, v, w->side_conditions);
            }
            if (auto *sol = std::get_if<Solution>(&cert)) {
                out.trace.events.push_back(label + " fired, solution verified");
                sol->notes.emplace_back("trial", zs);
                sol->notes.emplace_back("trial origin", origin_name(tf.origin));
                sol->notes.emplace_back("reduction", reduced_name(r->kind));
                if (r->eta) sol->notes.emplace_back("eta", render(Expr(*r->eta)));
                if (r->numeric_only) sol->notes.emplace_back("criterion", "numerically certified");
                if (r->kind == ReducedKind::Bernoulli && *r->eta > 1) {
                    sol->notes.emplace_back("degenerate constant", p.const_name + " = 0 gives u = z(t, 0)");
                }
                if (w->implicit) sol->notes.emplace_back("relation", "I(t, u) = constant");
                out.solution = std::move(*sol);
                return out;
            }
            out.trace.events.push_back(label + " fired, candidate rejected (" +
                                       std::get<VerificationFailure>(cert).reason + ")");
        }
    }
    out.trace.diagnostics.push_back("no trial led to a verified solution");
    return out;
}

}  // namespace opode
