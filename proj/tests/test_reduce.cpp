#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "opode/calculus.hpp"
#include "opode/eval.hpp"
#include "opode/reduce.hpp"
#include "opode/render.hpp"
#include "opode/zero.hpp"

using namespace opode;

namespace {
const Expr t = var("t");
const Expr c = var("c");

ODEProblem exode(const std::string &a, const std::string &extra = "") {
    return parse_ode("a = " + a + "; diff(u,t) = u^2 + diff(a,t) - a^2" + extra);
}

bool same(const Expr &x, const Expr &y) {
    ZeroOptions o;
    o.windows["c"] = {-1.0, 1.0};
    return equivalent_zero(x - y, o).is_zero();
}

double at(const Expr &e, double tv, double cv) { return to_double(eval_numeric(e, {{"t", tv}, {"c", cv}})); }
}  // namespace

TEST(Trial, Validation) {
    const ODEProblem p = parse_ode("diff(u,t) = u^2 + 1, at t=0");
    EXPECT_NO_THROW(make_trial(p, c + sin(t)));
    EXPECT_THROW(make_trial(p, c + cos(t)), TrialError);
    EXPECT_THROW(make_trial(p, t), TrialError);
}

TEST(Trial, BuiltinSetCoversGeneratorFamily) {
    const ODEProblem p = exode("t*exp(t) + ln(t)");
    const auto trials = builtin_trials(p);
    EXPECT_EQ(trials.front().z, c);
    bool found = false;
    for (const auto &tf : trials) found = found || tf.z == c + t * exp(t) + ln(t);
    EXPECT_TRUE(found);
    for (const auto &tf : trials) EXPECT_FALSE(diff(tf.z, "c").is_zero());
}

TEST(Trial, LoadFromFile) {
    const std::string path = testing::TempDir() + "trials.txt";
    {
        std::ofstream f(path);
        f << "# comment\n\nc\nc + t^2\n";
    }
    const ODEProblem p = exode("t^2");
    const auto trials = load_trials(p, path);
    ASSERT_EQ(trials.size(), 2u);
    EXPECT_EQ(trials[1].z, c + pow(t, 2));
    EXPECT_EQ(trials[1].origin, TrialOrigin::User);
    {
        std::ofstream f(path);
        f << "c\nt +\n";
    }
    EXPECT_THROW(load_trials(p, path), TrialError);
    std::remove(path.c_str());
}

TEST(Phi, Examples) {
    const ODEProblem p = parse_ode("diff(u,t) = u^2 + t*u + sin(t)");
    EXPECT_EQ(phi_of(p, {c}), substitute(p.rhs, "u", c));
    const Expr g = exp(t);
    EXPECT_EQ(phi_of(p, {c + g}), substitute(p.rhs, "u", c + g) - g);

    const Expr a = t * exp(t) + ln(t);
    EXPECT_EQ(phi_of(exode("t*exp(t) + ln(t)"), {c + a}), pow(c, 2) + 2 * a * c);
    EXPECT_THROW(phi_of(p, {t}), std::domain_error);
}

TEST(Criteria, Linear) {
    auto r = criterion_linear(t * c + sin(t));
    ASSERT_TRUE(r);
    EXPECT_EQ(r->alpha, t);
    EXPECT_EQ(r->beta, sin(t));
    EXPECT_FALSE(criterion_linear(pow(c, 2)));
    // Riccati rhs shifted by g stays quadratic.
    const ODEProblem p = parse_ode("diff(u,t) = u^2 + t");
    EXPECT_FALSE(criterion_linear(phi_of(p, {c + exp(t)})));
}

TEST(Criteria, Separable) {
    auto r = criterion_separable(pow(c, 2) + 1);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->alpha, Expr(1));
    EXPECT_EQ(r->beta, pow(c, 2) + 1);
    EXPECT_FALSE(criterion_separable(t + c));
    r = criterion_separable(exp(t) * pow(c, 3));
    ASSERT_TRUE(r);
    EXPECT_EQ(r->alpha, exp(t));
    EXPECT_EQ(r->beta, pow(c, 3));
    // Not a product in normal form: reference-point extraction.
    r = criterion_separable(t * pow(c, 2) + t);
    ASSERT_TRUE(r);
    EXPECT_TRUE(same(r->alpha * r->beta, t * pow(c, 2) + t));
    EXPECT_FALSE(depends_on(r->alpha, "c"));
    EXPECT_FALSE(depends_on(r->beta, "t"));
}

TEST(Criteria, Bernoulli) {
    const Expr a = pow(t, 2);
    auto r = criterion_bernoulli(pow(c, 2) + 2 * a * c);
    ASSERT_TRUE(r);
    EXPECT_EQ(*r->eta, Rational(2));
    EXPECT_EQ(r->alpha, Expr(1));
    EXPECT_EQ(r->beta, 2 * a);
    EXPECT_FALSE(criterion_bernoulli(sin(t) * c));
    r = criterion_bernoulli(pow(c, 3) * t + c * pow(t, 2));
    ASSERT_TRUE(r);
    EXPECT_EQ(*r->eta, Rational(3));
    EXPECT_EQ(r->alpha, t);
    EXPECT_EQ(r->beta, pow(t, 2));
}

TEST(Criteria, SoundnessAndConsistency) {
    const std::vector<Expr> phis{t * c + 1, exp(t) * c, pow(c, 2) + 1, pow(c, 2) * t - c,
                                 sin(t) * pow(c, 3), c + pow(c, 2) * t + 1};
    for (const Expr &phi : phis) {
        auto lin = criterion_linear(phi);
        auto sep = criterion_separable(phi);
        auto ber = criterion_bernoulli(phi);
        if (lin) EXPECT_TRUE(same(phi, lin->alpha * c + lin->beta)) << render(phi);
        if (sep) EXPECT_TRUE(same(phi, sep->alpha * sep->beta)) << render(phi);
        if (ber) {
            EXPECT_TRUE(same(phi, ber->alpha * pow(c, Expr(*ber->eta)) + ber->beta * c)) << render(phi);
            EXPECT_NE(*ber->eta, Rational(1));
            // A linear phi is never also Bernoulli.
            EXPECT_FALSE(lin) << render(phi);
        }
    }
}

TEST(SolveReduced, Examples) {
    const ODEProblem p = parse_ode("diff(u,t) = u^2 + 1, at t=0");
    auto w = solve_reduced({ReducedKind::Linear, 0, 1, std::nullopt, false}, p);
    ASSERT_TRUE(w);
    EXPECT_EQ(w->w, c + t);

    w = solve_reduced({ReducedKind::Separable, 1, 1 + pow(c, 2), std::nullopt, false}, p);
    ASSERT_TRUE(w);
    EXPECT_EQ(w->w, tan(t + arctan(c)));

    const ODEProblem q = exode("t^2", ", at t=1");
    const Expr a = pow(t, 2);
    w = solve_reduced({ReducedKind::Bernoulli, 1, 2 * a, Rational(2), false}, q);
    ASSERT_TRUE(w);
    // w' = w^2 + 2 a w, checked numerically.
    const Expr res = diff(w->w, "t") - pow(w->w, 2) - 2 * a * w->w;
    for (double tv : {1.0, 1.3, 1.7})
        for (double cv : {-0.4, 0.2, 0.5}) EXPECT_NEAR(at(res, tv, cv), 0.0, 1e-8);
    EXPECT_NEAR(at(w->w, 1.0, 0.37), 0.37, 1e-12);
}

TEST(SolveReduced, SeparableTable) {
    const ODEProblem p = parse_ode("diff(u,t) = u, at t=0");
    const std::vector<Expr> betas{pow(c, 3), c, 2 * exp(c), pow(c, 2) - 4, pow(c, 2) + 2 * c + 5, pow(c, -1)};
    for (const Expr &beta : betas) {
        auto w = solve_reduced({ReducedKind::Separable, t, beta, std::nullopt, false}, p);
        ASSERT_TRUE(w) << render(beta);
        ASSERT_FALSE(w->implicit) << render(beta);
        const Expr res = diff(w->w, "t") - t * substitute(beta, "c", w->w);
        for (double tv : {0.1, 0.3})
            for (double cv : {0.3, 0.6}) EXPECT_NEAR(at(res, tv, cv), 0.0, 1e-8) << render(beta);
        EXPECT_NEAR(at(w->w, 0.0, 0.45), 0.45, 1e-12) << render(beta);
    }
    // No explicit inverse: implicit relation.
    auto w = solve_reduced({ReducedKind::Separable, 1, c + exp(c), std::nullopt, false}, p);
    EXPECT_FALSE(w);
    w = solve_reduced({ReducedKind::Separable, 1, 1 / (1 + c * exp(c)), std::nullopt, false}, p);
    ASSERT_TRUE(w);
    EXPECT_TRUE(w->implicit);
}

TEST(Reduce, SquarePlusOne) {
    const auto start = std::chrono::steady_clock::now();
    const ODEProblem p = parse_ode("diff(u,t) = u^2 + 1");
    const Outcome o = reduce_and_solve(p, {make_trial(p, c)});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ASSERT_TRUE(o.solution);
    EXPECT_EQ(o.solution->expr(), tan(t + arctan(c)));
    EXPECT_EQ(o.solution->kind(), SolutionKind::General);
    EXPECT_EQ(o.solution->provenance(), Provenance::Reduce);
    EXPECT_LT(secs, 5.0);
}

TEST(Reduce, GeneratorFamilyViaBernoulli) {
    for (const char *src : {"t^2", "t*exp(t) + ln(t)", "3*t^5 - 2*t^(-3)"}) {
        const ODEProblem p = exode(src);
        const Expr a = parse_expr(src);
        const Outcome o = reduce_and_solve(p, {make_trial(p, c + a)});
        ASSERT_TRUE(o.solution) << src;
        bool bern = false;
        for (auto &[k, v] : o.solution->notes) bern = bern || (k == "reduction" && v == "bernoulli");
        EXPECT_TRUE(bern) << src;
        // Degenerate constant c = 0 gives back u = a.
        const Expr u0 = substitute(o.solution->expr(), "c", Expr(0));
        for (double tv : {0.5, 1.1, 1.9}) EXPECT_NEAR(at(u0, tv, 0), at(a, tv, 0), 1e-8) << src;
    }
}

TEST(Reduce, LinearRhs) {
    const ODEProblem p = parse_ode("diff(u,t) = t*u + 1, at t=0");
    const Outcome o = reduce_and_solve(p, {make_trial(p, c)});
    ASSERT_TRUE(o.solution);
    bool lin = false;
    for (auto &[k, v] : o.solution->notes) lin = lin || (k == "reduction" && v == "linear");
    EXPECT_TRUE(lin);
    EXPECT_NEAR(at(o.solution->expr(), 0.0, 0.7), 0.7, 1e-12);
}

TEST(Reduce, ImplicitSolution) {
    const ODEProblem p = parse_ode("diff(u,t) = 1/(1 + u*exp(u))");
    const Outcome o = reduce_and_solve(p, {make_trial(p, c)});
    ASSERT_TRUE(o.solution);
    EXPECT_EQ(o.solution->kind(), SolutionKind::Implicit);
    EXPECT_EQ(o.solution->record().status(), VerificationRecord::Status::Numeric);
}

TEST(Reduce, NoTrialFits) {
    const ODEProblem p = parse_ode("diff(u,t) = exp(u^2) + t");
    const Outcome o = reduce_and_solve(p, builtin_trials(p));
    EXPECT_FALSE(o.solution);
    EXPECT_FALSE(o.trace.diagnostics.empty());
}

TEST(Reduce, ExamineReportsEveryCriterion) {
    const ODEProblem p = parse_ode("diff(u,t) = u^2 + 1");
    const auto reps = examine_trials(p, {make_trial(p, c), make_trial(p, pow(c, 2))});
    ASSERT_EQ(reps.size(), 2u);
    EXPECT_FALSE(reps[0].linear);
    EXPECT_TRUE(reps[0].separable);
    EXPECT_TRUE(reps[0].phi);
}
