#include "opode/flow_series.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "opode/calculus.hpp"
#include "opode/omega_series.hpp"
#include "opode/render.hpp"

namespace opode {

namespace {

Expr integrate_from_base(const ODEProblem &p, const Expr &integrand, bool &closed) {
    AntiderivativeResult r = p.base_point
                                 ? definite(integrand, p.indep, *p.base_point, Expr::variable(p.indep))
                                 : integrate(integrand, p.indep);
    closed = closed && r.closed;
    return r.value;
}

// Degree of t in a term that is c * t^j * (t-free), or nullopt.
std::optional<int> t_degree(const Expr &term, const std::string &t) {
    int deg = 0;
    for (const Expr &f : factors_of(term)) {
        if (!depends_on(f, t)) continue;
        if (f.is_symbol()) {
            deg += 1;
        } else if (f.kind() == Kind::Power && f.base().is_symbol() && f.base().name() == t &&
                   f.exponent().is_integer() && f.exponent().value() > 0) {
            deg += boost::multiprecision::numerator(f.exponent().value()).convert_to<int>();
        } else {
            return std::nullopt;
        }
    }
    return deg;
}

}  // namespace

FlowIterate flow_seed(const ODEProblem &p) { return {0, Expr::variable(p.const_name), true}; }

FlowIterate picard_step(const ODEProblem &p, const FlowIterate &prev) {
    FlowIterate next;
    next.index = prev.index + 1;
    const Expr integrand = substitute(p.rhs, p.dep, prev.u);
    next.u = Expr::variable(p.const_name) + integrate_from_base(p, integrand, next.closed);
    next.closed = next.closed && prev.closed;
    return next;
}

std::optional<Expr> t_prefix(const ODEProblem &p, const Expr &e, int k) {
    Expr shifted = e;
    if (p.base_point && !p.base_point->is_zero()) {
        shifted = substitute(e, p.indep, Expr::variable(p.indep) + *p.base_point);
    }
    std::vector<Expr> keep;
    for (const Expr &term : terms_of(shifted)) {
        auto d = t_degree(term, p.indep);
        if (!d) return std::nullopt;
        if (*d <= k) keep.push_back(term);
    }
    Expr out = Expr::sum(std::move(keep));
    if (p.base_point && !p.base_point->is_zero()) {
        out = substitute(out, p.indep, Expr::variable(p.indep) - *p.base_point);
    }
    return out;
}

Outcome solve_flow(const ODEProblem &p, const FlowOptions &opts) {
    Outcome out;
    out.trace.strategy = "flow";
    const Expr c = Expr::variable(p.const_name);

    std::vector<FlowIterate> its{flow_seed(p)};
    std::vector<Expr> useq;
    std::set<std::string> tried;
    auto attempt = [&](const Expr &u, int k, const std::string &route) -> bool {
        if (u.has_integral()) return false;
        const std::string key = render(u);
        if (!tried.insert(key).second) return false;
        auto cert = certify(p, u, SolutionKind::General, Provenance::Flow, opts.verify);
        if (auto *sol = std::get_if<Solution>(&cert)) {
            out.trace.events.push_back("iter " + std::to_string(k) + ": " + route + " " + key + " verified");
            sol->notes.emplace_back("iterations", std::to_string(k));
            sol->notes.emplace_back("constant", p.base_point ? p.const_name + " = u(" + render(*p.base_point) + ")"
                                                            : p.const_name + " (zero-constant integrals)");
            out.solution = std::move(*sol);
            return true;
        }
        out.trace.events.push_back("iter " + std::to_string(k) + ": " + route + " " + key + " rejected (" +
                                   std::get<VerificationFailure>(cert).reason + ")");
        return false;
    };

    for (int k = 1; k <= opts.max_iter; ++k) {
        FlowIterate next = picard_step(p, its.back());
        out.trace.iterations = k;
        if (p.base_point && substitute(next.u, p.indep, *p.base_point) != c) {
            throw std::logic_error("flow iterate does not satisfy u(a, c) = c");
        }
        if (opts.t_degree_stabilization) {
            const int frozen = k - 1;
            auto before = t_prefix(p, its.back().u, frozen);
            auto after = t_prefix(p, next.u, frozen);
            if (before && after && *before != *after) {
                throw std::logic_error("Picard iterate changed a frozen t-degree");
            }
        }
        if (next.u.size() > opts.node_cap) {
            out.trace.diagnostics.push_back("expression size cap reached at iteration " + std::to_string(k));
            return out;
        }
        const bool fixed = next.u == its.back().u;
        its.push_back(std::move(next));
        useq.push_back(its.back().u);
        if (fixed) {
            if (attempt(its.back().u, k, "fixed point")) return out;
            out.trace.diagnostics.push_back("fixed point failed verification");
            return out;
        }
        if (auto rep = survived_part(useq, opts.window)) {
            if (attempt(rep->candidate, k, "survived")) return out;
        }
    }
    out.trace.diagnostics.push_back("no fixed point or verified survived part within " +
                                    std::to_string(opts.max_iter) + " iterations");
    return out;
}

Expr first_integral(const ODEProblem &p, int n) {
    const Expr c = Expr::variable(p.const_name);
    const Expr f = substitute(p.rhs, p.dep, c);
    Expr z = c;
    for (int k = 0; k < n; ++k) {
        bool closed = true;
        const Expr next = c - integrate_from_base(p, f * diff(z, p.const_name), closed);
        if (next == z) break;
        z = next;
    }
    return z;
}

}  // namespace opode
