#include "opode/omega_series.hpp"

#include <algorithm>
#include <sstream>

#include "opode/calculus.hpp"
#include "opode/render.hpp"

namespace opode {

OmegaOperator lift_rhs(const ODEProblem &p) {
    std::map<int, std::vector<Expr>> parts;
    for (const Expr &term : terms_of(p.rhs)) {
        int k = 0;
        std::vector<Expr> rest;
        for (const Expr &f : factors_of(term)) {
            if (!depends_on(f, p.dep)) {
                rest.push_back(f);
            } else if (f.is_symbol() && f.name() == p.dep) {
                k += 1;
            } else if (f.kind() == Kind::Power && f.base().is_symbol() && f.base().name() == p.dep &&
                       f.exponent().is_integer() && f.exponent().value() > 0 && f.exponent().value() <= 64) {
                k += boost::multiprecision::numerator(f.exponent().value()).convert_to<int>();
            } else {
                throw UnsupportedError("right-hand side is not polynomial in " + p.dep);
            }
        }
        parts[k].push_back(Expr::product(rest));
    }
    OmegaOperator op;
    const int d = parts.empty() ? 0 : parts.rbegin()->first;
    op.coeffs.assign(static_cast<std::size_t>(d) + 1, Expr(0));
    for (auto &[k, v] : parts) op.coeffs[static_cast<std::size_t>(k)] = Expr::sum(v);
    return op;
}

OmegaPoly apply_operator(const OmegaOperator &op, const OmegaPoly &s) {
    std::map<int, std::vector<Expr>> acc;
    for (int k = 0; k <= op.degree(); ++k) {
        const Expr &a = op.coeffs[static_cast<std::size_t>(k)];
        if (a.is_zero()) continue;
        for (const auto &[j, coef] : s) {
            if (j < k) continue;
            Integer falling = 1;
            for (int i = 0; i < k; ++i) falling *= (j - i);
            acc[j - k + 1].push_back(Expr::integer(falling) * a * coef);
        }
    }
    OmegaPoly out;
    for (auto &[deg, v] : acc) {
        Expr e = Expr::sum(std::move(v));
        if (!e.is_zero()) out[deg] = e;
    }
    return out;
}

namespace {

// Replaces rational multiples of known integrands inside `coef`.
Expr take_known(Expr &coef, const std::vector<KnownIntegral> &known) {
    std::vector<Expr> found;
    for (const KnownIntegral &k : known) {
        const std::vector<Expr> gs = terms_of(k.integrand);
        if (gs.empty()) continue;
        const std::vector<Expr> ts = terms_of(coef);
        const std::set<Expr, ExprLess> have(ts.begin(), ts.end());
        const auto [c0, r0] = split_coefficient(gs.front());
        for (const Expr &t : ts) {
            const auto [c, r] = split_coefficient(t);
            if (!(r == r0)) continue;
            const Rational ratio = c / c0;
            bool all = true;
            for (const Expr &g : gs) all = all && have.count(Expr(ratio) * g);
            if (all) {
                coef = coef - Expr(ratio) * k.integrand;
                found.push_back(Expr(ratio) * k.antiderivative);
            }
            break;
        }
    }
    return Expr::sum(std::move(found));
}

AntiderivativeResult integrate_in(const Expr &e, const ODEProblem &p, bool pooled) {
    const IntegrateOptions o{pooled};
    return p.base_point ? definite(e, p.indep, *p.base_point, Expr::variable(p.indep), o) : integrate(e, p.indep, o);
}

std::optional<Expr> monomial_sqrt(const Expr &term) {
    const auto [c, rest] = split_coefficient(term);
    if (c <= 0) return std::nullopt;
    const Integer num = boost::multiprecision::numerator(c), den = boost::multiprecision::denominator(c);
    const Integer rn = boost::multiprecision::sqrt(num), rd = boost::multiprecision::sqrt(den);
    if (rn * rn != num || rd * rd != den) return std::nullopt;
    std::vector<Expr> out{Expr::rational(rn, rd)};
    if (!rest.is_one()) {
        for (const Expr &f : factors_of(rest)) {
            if (f.kind() == Kind::Power && f.exponent().is_integer() &&
                boost::multiprecision::numerator(f.exponent().value()) % 2 == 0) {
                out.push_back(pow(f.base(), Expr(f.exponent().value() / 2)));
            } else if (f.is_call(Func::Exp)) {
                out.push_back(exp(f.arg() / 2));
            } else {
                return std::nullopt;
            }
        }
    }
    return Expr::product(std::move(out));
}

}  // namespace

NextTerm next_term(const OmegaOperator &op, const OmegaPoly &s, const ODEProblem &p,
                   const std::vector<KnownIntegral> &known) {
    NextTerm nt;
    const OmegaPoly integrand = apply_operator(op, s);
    for (const auto &[deg, c] : integrand) {
        Expr coef = c;
        const Expr reused = take_known(coef, known);
        AntiderivativeResult r = integrate_in(coef, p, false);
        if (!r.closed || reused.has_integral()) nt.open_degrees.insert(deg);
        for (const Expr &sc : r.side_conditions) nt.side_conditions.push_back(sc);
        const Expr value = r.value + reused;
        if (!value.is_zero()) nt.poly[deg] = value;
    }
    return nt;
}

std::optional<Expr> square_group(const Expr &e) {
    const std::vector<Expr> ts = terms_of(e);
    const std::set<Expr, ExprLess> have(ts.begin(), ts.end());
    std::optional<Expr> best;
    std::size_t best_len = 1;
    for (int sigma : {-1, 1}) {
        std::vector<Expr> roots;
        for (const Expr &t : ts) {
            if (auto r = monomial_sqrt(Expr(sigma) * t)) roots.push_back(*r);
        }
        for (std::size_t i = 0; i < roots.size(); ++i) {
            std::vector<Expr> signed_roots{roots[i]};
            for (std::size_t j = 0; j < roots.size(); ++j) {
                if (j == i) continue;
                for (int eps : {1, -1}) {
                    const Expr cand = Expr(eps) * roots[j];
                    bool ok = true;
                    for (const Expr &m : signed_roots) ok = ok && have.count(Expr(2 * sigma) * m * cand);
                    if (ok) {
                        signed_roots.push_back(cand);
                        break;
                    }
                }
            }
            if (signed_roots.size() <= best_len) continue;
            const Expr sq = Expr(sigma) * pow(Expr::sum(signed_roots), Expr(2));
            bool contained = true;
            for (const Expr &g : terms_of(sq)) contained = contained && have.count(g);
            if (!contained) continue;
            best = sq;
            best_len = signed_roots.size();
        }
    }
    return best;
}

AntiderivativeResult integrate_grouped(const Expr &a0, const ODEProblem &p, std::vector<KnownIntegral> &known) {
    AntiderivativeResult whole = integrate_in(a0, p, false);
    if (whole.closed) return whole;
    const std::optional<Expr> g = square_group(a0);
    if (!g) return whole;
    AntiderivativeResult rest = integrate_in(a0 - *g, p, false);
    if (!rest.closed) return whole;
    AntiderivativeResult group = integrate_in(*g, p, true);
    if (group.closed) {
        rest.value = rest.value + group.value;
        for (Expr &sc : group.side_conditions) rest.side_conditions.push_back(std::move(sc));
        return rest;
    }
    Expr lazy;
    if (p.base_point) {
        std::string tau = "tau";
        while (depends_on(*g, tau) || tau == p.indep) tau += "1";
        lazy = Expr::integral(substitute(*g, p.indep, Expr::variable(tau)), tau, *p.base_point, Expr::variable(p.indep));
    } else {
        lazy = Expr::integral(*g, p.indep);
    }
    known.push_back({*g, lazy});
    rest.value = rest.value + lazy;
    rest.closed = false;
    return rest;
}

Expr partial_solution(const std::vector<OmegaPoly> &terms) {
    std::vector<Expr> parts;
    for (const OmegaPoly &s : terms) {
        auto it = s.find(1);
        if (it != s.end()) parts.push_back(it->second);
    }
    return Expr::sum(std::move(parts));
}

std::optional<SurvivedReport> survived_part(const std::vector<Expr> &sequence, int window) {
    if (window < 1 || static_cast<int>(sequence.size()) < window) return std::nullopt;
    const std::size_t first = sequence.size() - static_cast<std::size_t>(window);
    SurvivedReport rep;
    rep.window = window;
    rep.first_stable = static_cast<int>(first) + 1;
    rep.sequence = sequence;

    bool identical = true;
    for (std::size_t i = first + 1; i < sequence.size(); ++i) identical = identical && sequence[i] == sequence[first];
    if (identical) {
        rep.candidate = sequence[first];
        return rep;
    }

    std::vector<Expr> common;
    for (const Expr &t : terms_of(sequence[first])) {
        if (!t.has_integral()) common.push_back(t);
    }
    for (std::size_t i = first + 1; i < sequence.size() && !common.empty(); ++i) {
        const std::vector<Expr> ts = terms_of(sequence[i]);
        std::vector<Expr> keep;
        for (const Expr &c : common) {
            if (std::find(ts.begin(), ts.end(), c) != ts.end()) keep.push_back(c);
        }
        common = std::move(keep);
    }
    if (common.empty()) return std::nullopt;
    rep.candidate = Expr::sum(common);
    return rep;
}

namespace {

std::size_t poly_size(const OmegaPoly &s) {
    std::size_t n = 0;
    for (const auto &[d, c] : s) n += c.size();
    return n;
}

// Seed S_1: e^{omega c} truncated, or 1 for c = 0.
OmegaPoly seed_poly(const ODEProblem &p, const DysonOptions &opts, int max_degree) {
    OmegaPoly s{{0, Expr(1)}};
    if (!opts.symbolic_c) return s;
    const Expr c = Expr::variable(p.const_name);
    Expr term = 1;
    for (int j = 1; j <= max_degree; ++j) {
        term = term * c / j;
        s[j] = term;
    }
    return s;
}

class Series {
public:
    Series(const ODEProblem &original, ODEProblem work, Expr shift, std::vector<KnownIntegral> known,
           const DysonOptions &opts, Trace &trace, std::string label)
        : original_(original), work_(std::move(work)), shift_(std::move(shift)), known_(std::move(known)),
          opts_(opts), trace_(trace), label_(std::move(label)) {
        try {
            op_ = lift_rhs(work_);
        } catch (const UnsupportedError &e) {
            trace_.diagnostics.push_back(label_ + ": " + e.what());
            done_ = true;
            return;
        }
        drop_ = std::max(0, op_.degree() - 1);
        reach_ = 1 + (opts_.max_iter - 1) * std::max(1, drop_);
        s_ = seed_poly(work_, opts_, reach_);
    }

    bool done() const { return done_; }
    int iterations() const { return iter_; }
    std::optional<Solution> &solution() { return solution_; }

    // Advances one iteration; returns true once finished.
    bool step() {
        if (done_) return true;
        const int i = ++iter_;
        if (i > 1) {
            NextTerm nt = next_term(op_, s_, work_, known_);
            s_ = std::move(nt.poly);
            for (const Expr &sc : nt.side_conditions) {
                if (std::find(side_.begin(), side_.end(), sc) == side_.end()) side_.push_back(sc);
            }
            const int bound = (opts_.symbolic_c ? reach_ : 0) + 1 + (i - 1) * std::max(1, drop_);
            if (!s_.empty() && s_.rbegin()->first > bound) {
                throw std::logic_error("omega degree exceeds the recurrence bound");
            }
            // Degrees that cannot come back down to 1 within the remaining steps.
            for (auto it = s_.begin(); it != s_.end();) {
                const bool unreachable =
                    drop_ == 0 ? it->first > 1 : it->first - 1 > (opts_.max_iter - i) * drop_;
                it = unreachable ? s_.erase(it) : std::next(it);
            }
            if (nt.open_degrees.count(1)) {
                trace_.events.push_back(label_ + " iter " + std::to_string(i) +
                                        ": degree-1 coefficient kept an open integral");
            }
        }
        if (auto it = s_.find(1); it != s_.end()) running_ = running_ + it->second;
        useq_.push_back(running_);

        if (poly_size(s_) + running_.size() > opts_.node_cap) {
            trace_.diagnostics.push_back(label_ + ": expression size cap reached at iteration " + std::to_string(i));
            return done_ = true;
        }
        if (auto rep = survived_part(useq_, opts_.window)) examine(*rep, i);
        if (!done_ && i >= opts_.max_iter) {
            trace_.diagnostics.push_back(label_ + ": no verified survived part within " +
                                         std::to_string(opts_.max_iter) + " iterations");
            done_ = true;
        }
        return done_;
    }

private:
    void examine(const SurvivedReport &rep, int i) {
        const Expr u = rep.candidate + shift_;
        if (u.has_integral()) return;
        const std::string key = render(u);
        if (!tried_.insert(key).second) return;
        auto cert = certify(original_, u, SolutionKind::Particular, Provenance::Dyson, opts_.verify, side_);
        if (auto *sol = std::get_if<Solution>(&cert)) {
            trace_.events.push_back(label_ + " iter " + std::to_string(i) + ": survived " + key + " verified");
            solution_ = std::move(*sol);
            solution_->notes.emplace_back("iterations", std::to_string(i));
            solution_->notes.emplace_back("series", label_);
            done_ = true;
            return;
        }
        const auto &fail = std::get<VerificationFailure>(cert);
        trace_.events.push_back(label_ + " iter " + std::to_string(i) + ": survived " + key + " rejected (" +
                                fail.reason + ")");
    }

    const ODEProblem &original_;
    ODEProblem work_;
    Expr shift_;
    std::vector<KnownIntegral> known_;
    const DysonOptions &opts_;
    Trace &trace_;
    std::string label_;
    OmegaOperator op_;
    int drop_ = 0, reach_ = 1, iter_ = 0;
    OmegaPoly s_;
    std::vector<Expr> useq_, side_;
    std::set<std::string> tried_;
    Expr running_ = 0;
    bool done_ = false;
    std::optional<Solution> solution_;
};

}  // namespace

Outcome solve_dyson(const ODEProblem &p, const DysonOptions &opts) {
    Outcome out;
    out.trace.strategy = "dyson";
    OmegaOperator op;
    try {
        op = lift_rhs(p);
    } catch (const UnsupportedError &e) {
        out.trace.diagnostics.push_back(e.what());
        return out;
    }

    std::vector<KnownIntegral> known;
    std::vector<Series> runs;
    runs.reserve(2);
    const Expr a0 = op.coeffs[0];
    if (!a0.is_zero() && op.degree() > 0) {
        AntiderivativeResult A = integrate_grouped(a0, p, known);
        if (opts.precondition && (A.closed || !known.empty())) {
            // u = uhat + A turns u' = f(t, u) into uhat' = f(t, uhat + A) - A'.
            ODEProblem hat = p;
            hat.rhs = substitute(p.rhs, p.dep, Expr::variable(p.dep) + A.value) - a0;
            runs.emplace_back(p, std::move(hat), A.value, known, opts, out.trace, "preconditioned");
        } else if (opts.precondition) {
            out.trace.events.push_back("precondition skipped: integral of the u-free part does not close");
        }
    }
    runs.emplace_back(p, p, Expr(0), known, opts, out.trace, "plain");

    // Lockstep, the preconditioned series first within each iteration.
    bool pending = true;
    while (pending) {
        pending = false;
        for (Series &r : runs) {
            if (r.done()) continue;
            r.step();
            if (r.solution()) {
                out.solution = std::move(r.solution());
                for (const Series &q : runs) out.trace.iterations = std::max(out.trace.iterations, q.iterations());
                return out;
            }
            pending = pending || !r.done();
        }
    }
    for (const Series &q : runs) out.trace.iterations = std::max(out.trace.iterations, q.iterations());
    return out;
}

}  // namespace opode
