#include "opode/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "opode/calculus.hpp"
#include "opode/flow_series.hpp"
#include "opode/omega_series.hpp"
#include "opode/part2gen.hpp"
#include "opode/render.hpp"

namespace opode {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

double since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

ParseContext request_context(const SolveRequest &r) {
    ParseContext ctx = default_context();
    for (const std::string &d : r.definitions) {
        const auto eq = d.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("definition '" + d + "' is not of the form name=expr");
        std::string name = d.substr(0, eq);
        while (!name.empty() && name.back() == ' ') name.pop_back();
        ctx.definitions[name] = parse_expr(d.substr(eq + 1), ctx);
    }
    return ctx;
}

StrategyRun run_strategy(const std::string &name, const std::function<Outcome()> &body,
                         std::vector<Solution> &solutions) {
    const auto start = Clock::now();
    StrategyRun run;
    try {
        Outcome o = body();
        run.trace = std::move(o.trace);
        if (o.solution) {
            run.found = true;
            solutions.push_back(std::move(*o.solution));
        }
    } catch (const UnsupportedError &e) {
        run.trace.diagnostics.push_back(e.what());
    } catch (const std::runtime_error &e) {
        run.trace.diagnostics.push_back(e.what());
    }
    if (run.trace.strategy.empty()) run.trace.strategy = name;
    run.seconds = since(start);
    return run;
}

Outcome riccati_outcome(const ODEProblem &p, const Expr &seed, const VerifyOptions &v) {
    Outcome o;
    o.trace.strategy = "riccati";
    o.solution = riccati_general(p, make_seed(p, seed, std::nullopt, v), v);
    o.trace.events.push_back("seed " + render(seed));
    return o;
}

json strings(const std::vector<std::string> &v) { return json(v); }

json bindings_json(const Bindings &b) {
    json out = json::object();
    for (const auto &[k, v] : b.values()) {
        out[k] = std::holds_alternative<Rational>(v) ? std::get<Rational>(v).str() : decimal(std::get<double>(v));
    }
    return out;
}

}  // namespace

const char *method_name(Method m) {
    switch (m) {
    case Method::Auto: return "auto";
    case Method::Dyson: return "dyson";
    case Method::Flow: return "flow";
    case Method::Reduce: return "reduce";
    case Method::Riccati: return "riccati";
    }
    return "?";
}

std::string decimal(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

ODEProblem request_problem(const SolveRequest &r) {
    const ParseContext ctx = request_context(r);
    ODEProblem p = parse_ode(r.ode, ctx);
    if (r.at) p.base_point = parse_expr(*r.at, ctx);
    return p;
}

SolveReport run_solve(const SolveRequest &r) {
    const auto start = Clock::now();
    SolveReport rep;
    rep.input = r.ode;
    rep.method = r.method;
    ODEProblem p;
    std::optional<Expr> seed;
    std::vector<TrialFunction> trials;
    try {
        p = request_problem(r);
        rep.problem = render_ode(p);
        if (r.seed_solution) seed = parse_expr(*r.seed_solution, request_context(r));
        if (r.method == Method::Riccati && !seed) throw UsageError("--method riccati requires --seed-solution");
        if (r.method == Method::Auto || r.method == Method::Reduce) {
            trials = r.trials_path ? load_trials(p, *r.trials_path) : builtin_trials(p);
        }
        if (r.method == Method::Riccati) make_seed(p, *seed, std::nullopt, r.verify);
    } catch (const std::exception &e) {
        rep.diagnostics.push_back(e.what());
        rep.exit_code = 1;
        rep.seconds = since(start);
        return rep;
    }

    DysonOptions dyson;
    dyson.window = r.window;
    dyson.verify = r.verify;
    if (r.max_iter) dyson.max_iter = *r.max_iter;
    FlowOptions flow;
    flow.window = r.window;
    flow.verify = r.verify;
    if (r.max_iter) flow.max_iter = *r.max_iter;

    auto run = [&](const std::string &name, const std::function<Outcome()> &body) {
        rep.runs.push_back(run_strategy(name, body, rep.solutions));
        return rep.runs.back().found;
    };
    auto reduce = [&] { return run("reduce", [&] { return reduce_and_solve(p, trials, r.verify); }); };
    auto dyson_run = [&] { return run("dyson", [&] { return solve_dyson(p, dyson); }); };
    auto flow_run = [&] { return run("flow", [&] { return solve_flow(p, flow); }); };
    auto riccati = [&](const Expr &s) { return run("riccati", [&] { return riccati_outcome(p, s, r.verify); }); };

    switch (r.method) {
    case Method::Reduce: reduce(); break;
    case Method::Dyson: dyson_run(); break;
    case Method::Flow: flow_run(); break;
    case Method::Riccati: riccati(*seed); break;
    case Method::Auto:
        if (reduce()) break;
        if (dyson_run()) {
            const Solution &found = rep.solutions.front();
            bool quadratic = false;
            try {
                quadratic = lift_rhs(p).degree() == 2;
            } catch (const UnsupportedError &) {
            }
            if (found.kind() == SolutionKind::Particular && quadratic) riccati(found.expr());
            break;
        }
        if (flow_run()) break;
        if (seed) riccati(*seed);
        break;
    }
    if (rep.solutions.empty()) {
        rep.diagnostics.push_back(std::string("no strategy produced a verified solution (method ") +
                                  method_name(r.method) + ")");
        for (const StrategyRun &s : rep.runs) {
            for (const std::string &d : s.trace.diagnostics) rep.diagnostics.push_back(s.trace.strategy + ": " + d);
        }
    }
    rep.exit_code = rep.solutions.empty() ? 2 : 0;
    rep.seconds = since(start);
    return rep;
}

VerifyReport run_verify(const SolveRequest &r, const std::string &candidate) {
    const ODEProblem p = request_problem(r);
    const Expr u = parse_expr(candidate, request_context(r));
    VerifyReport rep;
    rep.problem = render_ode(p);
    rep.candidate = render(u);
    rep.residual = render(residual(p, u));
    const SolutionKind kind = depends_on(u, p.const_name) ? SolutionKind::General : SolutionKind::Particular;
    auto cert = certify(p, anchor_integrals(u, p.base_point.value_or(Expr(1))), kind, Provenance::User, r.verify);
    if (auto *s = std::get_if<Solution>(&cert)) {
        rep.pass = true;
        rep.solution = std::move(*s);
    } else {
        rep.failure = std::get<VerificationFailure>(cert);
    }
    return rep;
}

json to_json(const Solution &s) {
    const VerificationRecord &v = s.record();
    json excluded = json::array();
    for (const Bindings &b : v.excluded()) excluded.push_back(bindings_json(b));
    json side = json::array();
    for (const Expr &e : s.side_conditions()) side.push_back(render(e));
    json notes = json::object();
    for (const auto &[k, val] : s.notes) notes[k] = val;
    return {
        {"kind", kind_name(s.kind())},
        {"provenance", provenance_name(s.provenance())},
        {"expr", render(s.expr())},
        {"tree", to_json(s.expr())},
        {"verification",
         {{"status", status_name(v.status())},
          {"max_residual", decimal(v.max_residual())},
          {"samples", v.samples()},
          {"strict", v.strict()},
          {"excluded", excluded}}},
        {"side_conditions", side},
        {"notes", notes},
    };
}

json to_json(const SolveReport &r) {
    json runs = json::array();
    for (const StrategyRun &s : r.runs) {
        runs.push_back({{"strategy", s.trace.strategy},
                        {"found", s.found},
                        {"iterations", s.trace.iterations},
                        {"events", strings(s.trace.events)},
                        {"diagnostics", strings(s.trace.diagnostics)},
                        {"timing", {{"seconds", decimal(s.seconds)}}}});
    }
    json sols = json::array();
    for (std::size_t i = 0; i < r.solutions.size(); ++i) {
        json j = to_json(r.solutions[i]);
        j["primary"] = i == 0;
        sols.push_back(std::move(j));
    }
    return {{"schema", "opode.solve/1"},
            {"input", r.input},
            {"problem", r.problem},
            {"method", method_name(r.method)},
            {"exit_code", r.exit_code},
            {"strategies", runs},
            {"solutions", sols},
            {"diagnostics", strings(r.diagnostics)},
            {"timing", {{"seconds", decimal(r.seconds)}}}};
}

json to_json(const VerifyReport &r) {
    json j = {{"schema", "opode.verify/1"},
              {"problem", r.problem},
              {"candidate", r.candidate},
              {"residual", r.residual},
              {"pass", r.pass}};
    if (r.solution) j["solution"] = to_json(*r.solution);
    if (r.failure) {
        j["failure"] = {{"reason", r.failure->reason},
                        {"witness", bindings_json(r.failure->witness)},
                        {"residual", decimal(r.failure->residual)}};
    }
    return j;
}

json to_json(const std::vector<TrialReport> &reps) {
    auto reduced = [](const std::optional<ReducedEquation> &e) -> json {
        if (!e) return nullptr;
        json j = {{"kind", reduced_name(e->kind)},
                  {"alpha", render(e->alpha)},
                  {"beta", render(e->beta)},
                  {"numeric_only", e->numeric_only}};
        if (e->eta) j["eta"] = e->eta->str();
        return j;
    };
    json trials = json::array();
    for (const TrialReport &t : reps) {
        trials.push_back({{"trial", render(t.trial.z)},
                          {"origin", origin_name(t.trial.origin)},
                          {"phi", t.phi ? json(render(*t.phi)) : json(nullptr)},
                          {"linear", reduced(t.linear)},
                          {"separable", reduced(t.separable)},
                          {"bernoulli", reduced(t.bernoulli)},
                          {"error", t.error}});
    }
    return {{"schema", "opode.reduce/1"}, {"trials", trials}};
}

json to_json(const std::vector<chronos::CheckReport> &reps) {
    json checks = json::array();
    bool all = true;
    for (const auto &c : reps) {
        all = all && c.pass;
        checks.push_back({{"name", c.name},
                          {"deviation", decimal(c.deviation)},
                          {"tolerance", decimal(c.tolerance)},
                          {"pass", c.pass},
                          {"detail", c.detail}});
    }
    return {{"schema", "opode.oracle/1"}, {"pass", all}, {"checks", checks}};
}

std::string to_text(const SolveReport &r) {
    std::ostringstream os;
    os << "problem: " << (r.problem.empty() ? r.input : r.problem) << "\n";
    for (const StrategyRun &s : r.runs) {
        os << "strategy " << s.trace.strategy << ": " << (s.found ? "solution" : "none") << ", "
           << s.trace.iterations << " iterations, " << std::setprecision(3) << s.seconds << " s\n";
        for (const std::string &d : s.trace.diagnostics) os << "  " << d << "\n";
    }
    for (std::size_t i = 0; i < r.solutions.size(); ++i) {
        const Solution &s = r.solutions[i];
        os << (i == 0 ? "solution" : "also") << " (" << kind_name(s.kind()) << ", " << provenance_name(s.provenance())
           << ", " << status_name(s.record().status()) << "): u = " << render(s.expr()) << "\n";
        for (const auto &[k, v] : s.notes) os << "  " << k << ": " << v << "\n";
        for (const Expr &c : s.side_conditions()) os << "  requires " << render(c) << "\n";
    }
    for (const std::string &d : r.diagnostics) os << d << "\n";
    return os.str();
}

std::string to_text(const VerifyReport &r) {
    std::ostringstream os;
    os << "problem: " << r.problem << "\ncandidate: " << r.candidate << "\nresidual: " << r.residual << "\n";
    if (r.pass) {
        os << "verified (" << status_name(r.solution->record().status())
           << "), max residual " << decimal(r.solution->record().max_residual()) << "\n";
    } else {
        os << "not a solution: " << r.failure->reason;
        if (!r.failure->witness.values().empty()) os << " at " << r.failure->witness.str();
        os << "\n";
    }
    return os.str();
}

std::string to_text(const std::vector<TrialReport> &reps) {
    std::ostringstream os;
    for (const TrialReport &t : reps) {
        os << "trial z = " << render(t.trial.z) << " (" << origin_name(t.trial.origin) << ")\n";
        if (!t.error.empty()) {
            os << "  error: " << t.error << "\n";
            continue;
        }
        if (t.phi) os << "  phi = " << render(*t.phi) << "\n";
        auto line = [&](const char *name, const std::optional<ReducedEquation> &e) {
            os << "  " << name << ": ";
            if (!e) {
                os << "no\n";
                return;
            }
            os << "alpha = " << render(e->alpha) << ", beta = " << render(e->beta);
            if (e->eta) os << ", eta = " << e->eta->str();
            os << (e->numeric_only ? " (numeric)" : "") << "\n";
        };
        line("linear", t.linear);
        line("separable", t.separable);
        line("bernoulli", t.bernoulli);
    }
    return os.str();
}

std::string to_text(const std::vector<chronos::CheckReport> &reps) {
    std::ostringstream os;
    for (const auto &c : reps) {
        os << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << std::setprecision(3) << c.deviation << " (tol "
           << c.tolerance << ")";
        if (!c.detail.empty()) os << "  [" << c.detail << "]";
        os << "\n";
    }
    return os.str();
}

}  // namespace opode
