#include "opode/part2gen.hpp"

#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "opode/calculus.hpp"
#include "opode/omega_series.hpp"
#include "opode/render.hpp"
#include "opode/zero.hpp"

namespace opode {

namespace {

Expr integrate_from_base(const ODEProblem &p, const Expr &e, std::vector<Expr> *side = nullptr) {
    AntiderivativeResult r = p.base_point ? definite(e, p.indep, *p.base_point, Expr::variable(p.indep))
                                          : integrate(e, p.indep);
    if (side) {
        for (Expr &s : r.side_conditions) side->push_back(std::move(s));
    }
    return r.value;
}

}  // namespace

ParticularSeed make_seed(const ODEProblem &p, const Expr &u0, std::optional<Expr> c0, const VerifyOptions &v) {
    if (depends_on(u0, p.const_name)) throw SeedError("seed " + render(u0) + " depends on " + p.const_name);
    if (std::holds_alternative<VerificationFailure>(verify(p, anchor_integrals(u0, p.base_point.value_or(Expr(1))), v))) {
        throw SeedError("seed " + render(u0) + " does not solve the equation");
    }
    if (!c0) c0 = p.base_point ? substitute(u0, p.indep, *p.base_point) : Expr::variable("c0");
    return {u0, *c0};
}

Expr variational_exponent(const ODEProblem &p, const ParticularSeed &seed) {
    const Expr phi = substitute(diff(p.rhs, p.dep), p.dep, seed.u0);
    return exp(integrate_from_base(p, phi));
}

Solution riccati_general(const ODEProblem &p, const ParticularSeed &seed, const VerifyOptions &v) {
    const OmegaOperator op = lift_rhs(p);
    if (op.degree() != 2) throw UnsupportedError("right-hand side is not quadratic in " + p.dep);
    const Expr E = variational_exponent(p, seed);
    std::vector<Expr> side;
    const Expr I = integrate_from_base(p, op.coeffs[2] * E, &side);
    ODEProblem named = p;
    named.const_name = "C";
    const Expr u = seed.u0 + E / (Expr::variable("C") - I);
    auto cert = certify(named, u, SolutionKind::General, Provenance::Part2Gen, v, side);
    if (auto *f = std::get_if<VerificationFailure>(&cert)) {
        throw std::runtime_error("Riccati general solution failed verification: " + f->reason);
    }
    Solution sol = std::get<Solution>(std::move(cert));
    sol.notes.emplace_back("constant", "C");
    sol.notes.emplace_back("seed", render(seed.u0));
    sol.notes.emplace_back("degenerate constant", "1/C = 0 gives the seed");
    return sol;
}

Expr first_order_general(const ODEProblem &p, const ParticularSeed &seed) {
    return seed.u0 + (Expr::variable(p.const_name) - seed.c0) * variational_exponent(p, seed);
}

DudcReport dudc_check(const ODEProblem &p, const Expr &u, const std::string &constant, const DudcOptions &o) {
    DudcReport rep;
    const Expr uc = diff(u, constant);
    const Expr phi = diff(p.rhs, p.dep);
    Bindings fixed;
    for (const auto &[name, value] : o.parameters) fixed.set(name, value);
    const double t0 = p.base_point ? eval_numeric(*p.base_point, fixed) : o.t_window.first;

    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> td(o.t_window.first, o.t_window.second);
    std::uniform_real_distribution<double> cd(o.c_window.first, o.c_window.second);

    auto value = [&](const Expr &e, double t, double c) {
        Bindings b = fixed;
        b.set(p.indep, t).set(constant, c);
        const double x = eval_numeric(e, b);
        if (!std::isfinite(x)) throw EvalError(EvalError::Kind::Domain, "non-finite value");
        return x;
    };

    int redraws_left = o.redraws * o.samples;
    while (rep.samples < o.samples) {
        const double t = td(rng), c = cd(rng);
        try {
            // Reject paths that run into a pole of u.
            for (int i = 0; i <= 64; ++i) {
                if (std::abs(value(u, t0 + (t - t0) * i / 64.0, c)) > o.blowup) {
                    throw EvalError(EvalError::Kind::Domain, "path crosses a pole");
                }
            }
            auto integrand = [&](double tau) {
                Bindings b = fixed;
                b.set(p.indep, tau).set(p.dep, value(u, tau, c));
                return eval_numeric(phi, b);
            };
            const double lo = std::min(t0, t), hi = std::max(t0, t);
            double in = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lo, hi, 10, 1e-11);
            if (t < t0) in = -in;
            const double lhs = value(uc, t, c);
            const double rhs = value(uc, t0, c) * std::exp(in);
            const double dev = std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
            if (!std::isfinite(dev)) throw EvalError(EvalError::Kind::Domain, "non-finite deviation");
            ++rep.samples;
            if (dev >= rep.max_deviation) {
                rep.max_deviation = dev;
                rep.worst = Bindings{}.set(p.indep, t).set(constant, c);
            }
        } catch (const EvalError &) {
            rep.excluded.push_back(Bindings{}.set(p.indep, t).set(constant, c));
            if (--redraws_left < 0) break;
        }
    }
    rep.pass = rep.samples == o.samples && rep.max_deviation < o.rtol;
    return rep;
}

DudcReport dudc_check(const ODEProblem &p, const Solution &general, const DudcOptions &o) {
    std::string constant = p.const_name;
    for (const auto &[k, v] : general.notes) {
        if (k == "constant") constant = v;
    }
    return dudc_check(p, general.expr(), constant, o);
}

}  // namespace opode
