// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "gen.hpp"
#include "opode/calculus.hpp"
#include "opode/chronos.hpp"
#include "opode/eval.hpp"
#include "opode/flow_series.hpp"
#include "opode/omega_series.hpp"
#include "opode/part2gen.hpp"
#include "opode/pipeline.hpp"
#include "opode/reduce.hpp"
#include "opode/render.hpp"
#include "opode/zero.hpp"

using namespace opode;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point s) { return std::chrono::duration<double>(Clock::now() - s).count(); }

const Expr t = var("t");
const Expr c = var("c");

const char *const kFamily[] = {"t^2", "3*t^5 - 2*t^(-3)", "2*sin(t)^3", "t*exp(t)", "t*exp(t) + ln(t)"};

ODEProblem exode(const std::string &a) { return parse_ode("a = " + a + "; diff(u,t) = u^2 + diff(a,t) - a^2"); }

// max |u' - f(t, u)| on a grid, with u' by a five-point stencil.
double fd_residual(const ODEProblem &p, const Expr &u, double lo, double hi, Bindings fixed = {}) {
    double worst = 0.0;
    const double h = 1e-3;
    for (int i = 0; i <= 40; ++i) {
        const double tv = lo + (hi - lo) * i / 40.0;
        auto U = [&](double x) {
            Bindings b = fixed;
            b.set("t", x);
            return eval_numeric(u, b);
        };
        const double du = (-U(tv + 2 * h) + 8 * U(tv + h) - 8 * U(tv - h) + U(tv - 2 * h)) / (12 * h);
        Bindings b = fixed;
        b.set("t", tv).set(p.dep, U(tv));
        worst = std::max(worst, std::abs(du - eval_numeric(p.rhs, b)));
    }
    return worst;
}

// max |residual| on a t x c grid.
double grid_residual(const ODEProblem &p, const Expr &u, double t0, double t1, double c0, double c1,
                     const std::string &cname = "c") {
    const Expr r = residual(p, u);
    double worst = 0.0;
    for (int i = 0; i <= 30; ++i)
        for (int j = 0; j <= 20; ++j) {
            Bindings b;
            b.set("t", t0 + (t1 - t0) * i / 30.0).set(cname, c0 + (c1 - c0) * j / 20.0);
            worst = std::max(worst, std::abs(eval_numeric(r, b)));
        }
    return worst;
}

int failures = 0;

void line(int n, const std::string &name, const std::function<bool(std::ostringstream &)> &body) {
    std::ostringstream detail;
    bool ok = false;
    const auto start = Clock::now();
    try {
        ok = body(detail);
    } catch (const std::exception &e) {
        detail << "exception: " << e.what();
    }
    if (!ok) ++failures;
    std::printf("[%s] %d %s (%.2fs) %s\n", ok ? "PASS" : "FAIL", n, name.c_str(), since(start),
                detail.str().c_str());
    std::fflush(stdout);
}

}  // namespace

int main() {
    line(1, "generator family via dyson", [](std::ostringstream &d) {
        bool ok = true;
        for (const char *a : kFamily) {
            const ODEProblem p = exode(a);
            const auto start = Clock::now();
            const Outcome o = solve_dyson(p);
            const double secs = since(start);
            const bool hit = o.solution && equivalent_zero(o.solution->expr() - parse_expr(a)).is_zero() &&
                             o.trace.iterations <= 25 && secs <= 60.0;
            ok = ok && hit;
            d << "[" << a << ": " << (hit ? status_name(o.solution->record().status()) : "miss") << ", it "
              << o.trace.iterations << "] ";
        }
        return ok;
    });

    line(2, "DE3 at unit parameters via dyson", [](std::ostringstream &d) {
        ParseContext ctx = default_context();
        for (const char *k : {"p", "q", "m", "n", "l"}) ctx.definitions[k] = Expr(1);
        const ODEProblem p = parse_ode(
            "diff(u,t) = u^2 + p*t^(m-1)*m*exp(n*t) + p*t^m*n*exp(n*t) + q*l*ln(t)^(l-1)/t"
            " - t^(2*m)*p^2*exp(2*n*t) - 2*t^m*p*exp(n*t)*q*ln(t)^l - q^2*ln(t)^(2*l)",
            ctx);
        const Outcome o = solve_dyson(p);
        if (!o.solution) return false;
        const Expr u = o.solution->expr();
        const double res = grid_residual(p, u, 0.3, 2.3, 0, 0);
        const double fd = fd_residual(p, u, 0.3, 2.3);
        d << "u = " << render(u) << ", residual " << res << ", stencil " << fd;
        return u == t * exp(t) + ln(t) && res < 1e-9 && fd < 1e-6;
    });

    line(3, "DE1/DE2 residual audit", [](std::ostringstream &d) {
        SolveRequest r;
        r.ode = "diff(u,t) = u^2 + 1/t^138 + 41552420*t^90 + 4410*t^89 + 7225/t^136 - 13430*t^23 + 8330*t^22 + "
                "6241*t^182 - 7742*t^181 - 2401*t^180 + 1";
        const VerifyReport de1 = run_verify(r, "-85/t^68 + 79*t^91 + 49*t^90");
        r.ode = "diff(u,t) = u^2 - p*m*cos(t)*sin(t)^(m-1) + p^2*sin(t)^(2*m)";
        const VerifyReport de2 = run_verify(r, "p*sin(t)^m");
        r.ode = "diff(u,t) = u^2 + p*m*cos(t)*sin(t)^(m-1) - p^2*sin(t)^(2*m)";
        const VerifyReport de2_flipped = run_verify(r, "p*sin(t)^m");
        d << "DE1 residual " << de1.residual << "; DE2 residual " << de2.residual
          << "; DE2 with flipped signs " << (de2_flipped.pass ? "verifies" : "fails")
          << "; generator forms stand in (criterion 1)";
        // The recorded outcome: both printed forms are nonzero.
        return !de1.pass && !de2.pass && de2_flipped.pass;
    });

    line(4, "reduce on u^2 + 1 with z = c", [](std::ostringstream &d) {
        const auto start = Clock::now();
        const ODEProblem p = parse_ode("diff(u,t) = u^2 + 1");
        const Outcome o = reduce_and_solve(p, {make_trial(p, c)});
        const double secs = since(start);
        if (!o.solution) return false;
        bool separable = false;
        for (const auto &[k, v] : o.solution->notes) separable = separable || (k == "reduction" && v == "separable");
        const double res = grid_residual(p, o.solution->expr(), 0.3, 1.2, -1.0, 1.0);
        d << "u = " << render(o.solution->expr()) << ", residual " << res << ", " << secs << " s";
        return separable && res < 1e-9 && secs < 5.0;
    });

    line(5, "reduce on the generator family with z = c + a", [](std::ostringstream &d) {
        bool ok = true;
        for (const char *a : kFamily) {
            const ODEProblem p = exode(a);
            const Expr ae = parse_expr(a);
            const Outcome o = reduce_and_solve(p, {make_trial(p, c + ae)});
            bool bern = false, eta2 = false;
            if (o.solution) {
                for (const auto &[k, v] : o.solution->notes) {
                    bern = bern || (k == "reduction" && v == "bernoulli");
                    eta2 = eta2 || (k == "eta" && v == "2");
                }
            }
            double dev = INFINITY;
            if (o.solution) {
                dev = 0.0;
                const Expr u0 = substitute(o.solution->expr(), "c", Expr(0));
                for (double tv : {0.4, 0.9, 1.4, 1.9}) {
                    dev = std::max(dev, std::abs(eval_numeric(u0, {{"t", tv}}) - eval_numeric(ae, {{"t", tv}})));
                }
            }
            const bool hit = bern && eta2 && dev < 1e-8;
            ok = ok && hit;
            d << "[" << a << ": " << (hit ? "bernoulli" : "miss") << ", c=0 dev " << dev << "] ";
        }
        return ok;
    });

    line(6, "riccati family from u0 = -1/t", [](std::ostringstream &d) {
        const ODEProblem p = parse_ode("diff(u,t) = u^2");
        const Solution s = riccati_general(p, make_seed(p, -1 / t));
        double match = 0.0;
        for (double C : {-0.9, -0.3, 0.2, 0.7})
            for (double tv : {0.3, 0.5, 0.8}) {
                const double K = -1.0 / C;
                match = std::max(match, std::abs(eval_numeric(s.expr(), {{"t", tv}, {"C", C}}) - 1.0 / (K - tv)));
            }
        const double res = grid_residual(p, s.expr(), 0.3, 0.9, 0.0, 1.0, "C");
        const DudcReport dudc = dudc_check(p, s);
        d << "u = " << render(s.expr()) << ", 1/(K-t) dev " << match << ", residual " << res << ", dudc "
          << dudc.max_deviation << " on " << dudc.samples;
        return match < 1e-12 && res < 1e-9 && dudc.pass && dudc.samples == 16 && dudc.max_deviation < 1e-6;
    });

    line(7, "Picard order exactness for u^2", [](std::ostringstream &d) {
        const ODEProblem p = parse_ode("diff(u,t) = u^2, at t=0");
        FlowIterate it = flow_seed(p);
        for (int k = 0; k < 6; ++k) it = picard_step(p, it);
        std::vector<Expr> terms;
        for (int j = 0; j <= 6; ++j) terms.push_back(pow(c, Expr(j + 1)) * pow(t, Expr(j)));
        const auto prefix = t_prefix(p, it.u, 6);
        d << "prefix " << (prefix ? render(*prefix) : "none");
        return prefix && *prefix == Expr::sum(terms);
    });

    line(8, "ordered exponential oracle suite", [](std::ostringstream &d) {
        const auto start = Clock::now();
        const auto checks = chronos::oracle_suite(1);
        const double secs = since(start);
        bool ok = secs < 120.0;
        for (const auto &r : checks) {
            ok = ok && r.pass;
            if (!r.pass) d << "failed " << r.name << " " << r.deviation << "; ";
        }
        d << checks.size() << " checks, " << checks[1].detail << ", " << secs << " s";
        return ok;
    });

    line(9, "property suites", [](std::ostringstream &d) {
        gen::ExprGen g(9);
        int idem = 0, trip = 0, law = 0, hom = 0;
        for (int i = 0; i < 1000; ++i) {
            const Expr n = normalize(g.raw_tree(4));
            idem += normalize(n) == n;
            trip += parse_expr(render(n)) == n;
        }
        for (int i = 0; i < 1000; ++i) {
            const Expr e = g.rule_class();
            const AntiderivativeResult r = integrate(e, "t");
            law += r.closed && equivalent_zero(diff(r.value, "t") - e).is_zero();
        }
        for (const auto &r : chronos::homomorphy_suite(9, 10)) hom += r.pass;
        d << "idempotent " << idem << "/1000, round trip " << trip << "/1000, integration law " << law
          << "/1000, homomorphy " << hom << "/10";
        return idem == 1000 && trip == 1000 && law == 1000 && hom == 10;
    });

    return failures == 0 ? 0 : 1;
}
