#include "opode/verify.hpp"

#include <cmath>
#include <random>

#include <boost/numeric/odeint.hpp>

#include "opode/calculus.hpp"
#include "opode/zero.hpp"

namespace opode {

struct VerifyAccess {
    static VerificationRecord proven() { return VerificationRecord(); }
    static VerificationRecord numeric(const ZeroVerdict &v, bool strict) {
        VerificationRecord r;
        r.status_ = VerificationRecord::Status::Numeric;
        r.max_residual_ = v.max_residual;
        r.samples_ = v.samples;
        r.excluded_ = v.excluded;
        r.strict_ = strict;
        return r;
    }
    static VerificationRecord numeric(double max_res, int samples, std::vector<Bindings> excluded, bool strict) {
        VerificationRecord r;
        r.status_ = VerificationRecord::Status::Numeric;
        r.max_residual_ = max_res;
        r.samples_ = samples;
        r.excluded_ = std::move(excluded);
        r.strict_ = strict;
        return r;
    }
};

const char *kind_name(SolutionKind k) {
    switch (k) {
    case SolutionKind::Particular: return "particular";
    case SolutionKind::General: return "general";
    case SolutionKind::Implicit: return "implicit";
    }
    return "?";
}

const char *provenance_name(Provenance p) {
    switch (p) {
    case Provenance::Dyson: return "dyson";
    case Provenance::Flow: return "flow";
    case Provenance::Reduce: return "reduce";
    case Provenance::Part2Gen: return "part2gen";
    case Provenance::User: return "user";
    }
    return "?";
}

const char *mode_name(VerifyMode m) {
    switch (m) {
    case VerifyMode::Symbolic: return "symbolic";
    case VerifyMode::Numeric: return "numeric";
    case VerifyMode::Both: return "both";
    }
    return "?";
}

const char *status_name(VerificationRecord::Status s) {
    return s == VerificationRecord::Status::Proven ? "proven" : "numeric";
}

Solution::Solution(SolutionKind kind, Expr u, Provenance prov, VerificationRecord record,
                   std::vector<Expr> side_conditions)
    : kind_(kind), u_(std::move(u)), prov_(prov), record_(std::move(record)), side_(std::move(side_conditions)) {}

Expr anchor_integrals(const Expr &e, const Expr &lower) {
    if (!e.has_integral()) return e;
    if (e.kind() == Kind::Integral && !e.has_bounds()) {
        std::set<std::string> taken = free_names(e);
        std::string fresh = "tau";
        for (int i = 1; taken.count(fresh); ++i) fresh = "tau" + std::to_string(i);
        const Expr body = substitute(anchor_integrals(e.integrand(), lower), e.name(), Expr::variable(fresh));
        return Expr::integral(body, fresh, lower, Expr::variable(e.name()));
    }
    std::vector<Expr> args;
    for (const Expr &a : e.args()) args.push_back(anchor_integrals(a, lower));
    switch (e.kind()) {
    case Kind::Sum: return Expr::sum(args);
    case Kind::Product: return Expr::product(args);
    case Kind::Power: return pow(args[0], args[1]);
    case Kind::Call: return Expr::call(e.func(), args[0]);
    case Kind::Integral: return Expr::integral(args[0], e.name(), args[1], args[2]);
    default: return e;
    }
}

Bindings parameter_bindings(const Expr &e, const VerifyOptions &opts) {
    Bindings b;
    for (const std::string &n : free_names(e)) {
        auto it = opts.parameters.find(n);
        if (it != opts.parameters.end()) b.set(n, it->second);
    }
    return b;
}

Expr residual(const ODEProblem &p, const Expr &u) { return diff(u, p.indep) - substitute(p.rhs, p.dep, u); }

namespace {

ZeroOptions zero_options(const ODEProblem &p, const Expr &e, const VerifyOptions &opts, double tol) {
    ZeroOptions z;
    z.samples = opts.samples;
    z.tol = tol;
    z.seed = opts.seed;
    z.lo = opts.t_window.first;
    z.hi = opts.t_window.second;
    z.windows[p.indep] = opts.t_window;
    z.windows[p.const_name] = opts.c_window;
    z.fixed = parameter_bindings(e, opts);
    return z;
}

}  // namespace

VerifyResult verify(const ODEProblem &p, const Expr &u_in, const VerifyOptions &opts) {
    const Expr u = anchor_integrals(u_in, p.base_point.value_or(Expr(1)));
    Expr r;
    try {
        r = residual(p, u);
    } catch (const UnsupportedError &e) {
        return VerificationFailure{std::string("residual unavailable: ") + e.what(), {}, 0.0};
    }
    if (r.is_zero()) return VerifyAccess::proven();
    if (opts.mode == VerifyMode::Symbolic) {
        return VerificationFailure{"residual does not normalize to 0", {}, 0.0};
    }
    try {
        const ZeroVerdict v = equivalent_zero(r, zero_options(p, r, opts, opts.tol));
        if (!v.is_zero()) {
            const double val = eval_numeric(r, v.witness);
            return VerificationFailure{"nonzero residual", v.witness, val};
        }
        const ZeroVerdict strict = equivalent_zero(r, zero_options(p, r, opts, opts.tol / 10));
        return VerifyAccess::numeric(v, strict.is_zero());
    } catch (const EvalError &e) {
        return VerificationFailure{std::string("evaluation failed: ") + e.what(), {}, 0.0};
    }
}

VerifyResult verify_implicit(const ODEProblem &p, const Expr &first_integral, const VerifyOptions &opts) {
    using State = std::vector<double>;
    const Expr I = anchor_integrals(first_integral, p.base_point.value_or(Expr(1)));
    Bindings fixed = parameter_bindings(p.rhs + I, opts);
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> tdist(opts.t_window.first, opts.t_window.second);
    std::uniform_real_distribution<double> udist(opts.c_window.first, opts.c_window.second);

    double worst = 0.0;
    int samples = 0;
    std::vector<Bindings> excluded;
    const int trajectories = std::max(4, opts.samples / 4);
    for (int k = 0; k < trajectories; ++k) {
        const double t0 = tdist(rng);
        const double u0 = udist(rng);
        const double span = 0.25 * (opts.t_window.second - opts.t_window.first);
        Bindings b = fixed;
        b.set(p.indep, t0).set(p.dep, u0);
        double i0 = 0.0;
        try {
            i0 = eval_numeric(I, b);
        } catch (const EvalError &) {
            excluded.push_back(b);
            continue;
        }
        State x{u0};
        auto rhs = [&](const State &s, State &dxdt, double t) {
            Bindings bb = fixed;
            bb.set(p.indep, t).set(p.dep, s[0]);
            dxdt[0] = eval_numeric(p.rhs, bb);
        };
        try {
            namespace odeint = boost::numeric::odeint;
            auto stepper = odeint::make_controlled(1e-12, 1e-12, odeint::runge_kutta_dopri5<State>());
            double t = t0;
            const double t1 = t0 + span;
            const double dt_out = span / 8;
            for (int i = 1; i <= 8; ++i) {
                odeint::integrate_adaptive(stepper, rhs, x, t, t0 + i * dt_out, 1e-3);
                t = t0 + i * dt_out;
                if (!std::isfinite(x[0]) || std::abs(x[0]) > 1e6) break;
                Bindings bb = fixed;
                bb.set(p.indep, t).set(p.dep, x[0]);
                const double dev = std::abs(eval_numeric(I, bb) - i0) / std::max(1.0, std::abs(i0));
                worst = std::max(worst, dev);
                ++samples;
                if (!(dev <= std::max(opts.tol, 1e-8))) {
                    return VerificationFailure{"first integral drifts along a trajectory", bb, dev};
                }
            }
            (void)t1;
        } catch (const EvalError &) {
            excluded.push_back(b);
        }
    }
    if (samples == 0) return VerificationFailure{"no trajectory could be sampled", {}, 0.0};
    return VerifyAccess::numeric(worst, samples, std::move(excluded), worst <= std::max(opts.tol, 1e-8) / 10);
}

std::variant<Solution, VerificationFailure> certify(const ODEProblem &p, const Expr &u, SolutionKind kind,
                                                    Provenance prov, const VerifyOptions &opts,
                                                    std::vector<Expr> side_conditions) {
    const Expr anchored = anchor_integrals(u, p.base_point.value_or(Expr(1)));
    VerifyResult r = kind == SolutionKind::Implicit ? verify_implicit(p, anchored, opts) : verify(p, anchored, opts);
    if (auto *f = std::get_if<VerificationFailure>(&r)) return *f;
    return Solution(kind, anchored, prov, std::get<VerificationRecord>(std::move(r)), std::move(side_conditions));
}

}  // namespace opode
