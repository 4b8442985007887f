#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gen.hpp"
#include "opode/eval.hpp"
#include "opode/expr.hpp"
#include "opode/render.hpp"
#include "opode/zero.hpp"

using namespace opode;

namespace {

const Expr t = var("t");
const Expr c = var("c");
const Expr u = var("u");
const Expr x = var("x");
const Expr y = var("y");
const Expr p = par("p");
const Expr m = par("m");

bool close_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Normalize, UnitAndZeroLaws) {
    const Expr e = raw::sum({x, raw::product({Expr(0), y})});
    EXPECT_EQ(normalize(e), x);
}

TEST(Normalize, PowerCollection) {
    const Expr lhs = pow(p, 2) * pow(sin(t), 2 * m);
    const Expr rhs = pow(p * pow(sin(t), m), 2);
    EXPECT_TRUE((lhs - rhs).is_zero());
}

TEST(Normalize, LikeTerms) {
    const Expr e = raw::sum({raw::product({Expr(2), t, t}), raw::power(t, Expr(2))});
    EXPECT_EQ(normalize(e), 3 * pow(t, 2));
}

TEST(Normalize, ExpLnCancellation) {
    EXPECT_EQ(exp(ln(t)), t);
    EXPECT_EQ(ln(exp(t)), t);
    EXPECT_EQ(exp(-2 * ln(t)), pow(t, -2));
    EXPECT_EQ(exp(t) * exp(-t), Expr(1));
    EXPECT_TRUE(ln(Expr(1)).is_zero());
}

TEST(Normalize, Pythagorean) {
    EXPECT_TRUE((pow(sin(t), 2) + pow(cos(t), 2) - 1).is_zero());
    EXPECT_TRUE((pow(cos(t), 3) - cos(t) + cos(t) * pow(sin(t), 2)).is_zero());
}

TEST(Normalize, SymbolicPowersStayOpaque) {
    const Expr tm = pow(t, m);
    EXPECT_EQ(pow(tm, 2), pow(t, 2 * m));
    EXPECT_EQ(pow(tm, m).kind(), Kind::Power);
    EXPECT_EQ(pow(tm, m).base(), tm);
}

TEST(Normalize, ExpansionAndCancellation) {
    EXPECT_EQ(pow(t + 1, 2), pow(t, 2) + 2 * t + 1);
    EXPECT_EQ((t + 1) / (t + 1), Expr(1));
    EXPECT_EQ(t * pow(t, -2), pow(t, -1));
    EXPECT_EQ(pow(Expr(4), Expr::rational(1, 2)), Expr(2));
    EXPECT_EQ(pow(Expr::rational(8, 27), Expr::rational(-1, 3)), Expr::rational(3, 2));
}

TEST(Normalize, Parity) {
    EXPECT_EQ(sin(-t), -sin(t));
    EXPECT_EQ(cos(-t), cos(t));
    EXPECT_EQ(arctan(-2 * t), -arctan(2 * t));
    EXPECT_EQ(tan(arctan(t)), t);
}

TEST(Normalize, PermutedArgumentsGiveIdenticalForms) {
    gen::ExprGen gen(11);
    for (int i = 0; i < 200; ++i) {
        std::vector<Expr> parts{gen.raw_tree(2), gen.raw_tree(2), gen.raw_tree(2)};
        const Expr a = normalize(raw::sum(parts));
        std::reverse(parts.begin(), parts.end());
        const Expr b = normalize(raw::sum(parts));
        EXPECT_EQ(a, b);
        const Expr pa = normalize(raw::product(parts));
        std::rotate(parts.begin(), parts.begin() + 1, parts.end());
        EXPECT_EQ(pa, normalize(raw::product(parts)));
    }
}

TEST(Normalize, Idempotent) {
    gen::ExprGen gen(7);
    for (int i = 0; i < 500; ++i) {
        const Expr n = normalize(gen.raw_tree(4));
        EXPECT_EQ(normalize(n), n);
    }
}

TEST(Normalize, EvaluationHomomorphism) {
    gen::ExprGen gen(3);
    int checked = 0;
    for (int i = 0; i < 500; ++i) {
        const Expr r = gen.raw_tree(3);
        const Bindings b{{"t", 0.7 + 0.001 * i}, {"c", -0.4}, {"p", 1.3}};
        double raw_v = 0.0;
        try {
            raw_v = eval_numeric(r, b);
        } catch (const EvalError &) {
            continue;
        }
        if (std::abs(raw_v) > 1e8) continue;
        const double norm_v = eval_numeric(normalize(r), b);
        EXPECT_NEAR(norm_v, raw_v, 1e-9 * std::max(1.0, std::abs(raw_v))) << render(r);
        ++checked;
    }
    EXPECT_GT(checked, 300);
}

TEST(Substitute, SpecExamples) {
    EXPECT_EQ(substitute(pow(u, 2), "u", p * pow(sin(t), m)), pow(p, 2) * pow(sin(t), 2 * m));
    const Expr z = t * c + exp(t);
    EXPECT_EQ(substitute(c, "c", z), z);
    EXPECT_EQ(substitute(t + c, "t", 0), c);
}

TEST(Substitute, CommutesWithEvaluation) {
    gen::ExprGen gen(5);
    for (int i = 0; i < 200; ++i) {
        const Expr e = normalize(gen.raw_tree(3));
        const Expr r = normalize(gen.raw_tree(2));
        const Bindings b{{"t", 1.1}, {"c", 0.3}, {"p", 0.9}};
        try {
            const double rv = eval_numeric(r, b);
            Bindings b2 = b;
            b2.set("t", rv);
            const double direct = eval_numeric(e, b2);
            const double via = eval_numeric(substitute(e, "t", r), b);
            if (std::abs(direct) > 1e8) continue;
            EXPECT_TRUE(close_rel(via, direct, 1e-9));
        } catch (const EvalError &) {
        }
    }
}

TEST(Substitute, BoundVariableIsProtected) {
    const Expr tau = var("tau");
    const Expr I = Expr::integral(tau * t, "tau", 0, t);
    const Expr s = substitute(I, "t", tau + 1);
    const Bindings b{{"tau", 0.5}};
    // Int_0^{1.5} sigma*1.5 dsigma = 1.5^3 / 2
    EXPECT_NEAR(eval_numeric(s, b), 1.6875, 1e-10);
}

TEST(Eval, SpecExamples) {
    EXPECT_DOUBLE_EQ(eval_numeric(pow(t, 2), {{"t", 3}}), 9.0);
    EXPECT_DOUBLE_EQ(eval_numeric(exp(ln(t)), {{"t", 5}}), 5.0);
    const Expr tau = var("tau");
    EXPECT_NEAR(eval_numeric(Expr::integral(pow(tau, 2), "tau", 0, 1), {}), 1.0 / 3.0, 1e-10);
}

TEST(Eval, Errors) {
    EXPECT_THROW(eval_numeric(t + c, {{"t", 1}}), EvalError);
    EXPECT_THROW(eval_numeric(ln(t), {{"t", -1}}), EvalError);
    EXPECT_THROW(eval_numeric(pow(t, -1), {{"t", 0}}), EvalError);
    EXPECT_THROW(eval_numeric(Expr::integral(exp(pow(t, 2)), "t"), {{"t", 1}}), EvalError);
    EXPECT_DOUBLE_EQ(eval_numeric(t, {{"t", 2}, {"unused", 9}}), 2.0);
    EXPECT_NEAR(eval_numeric(pow(t, Expr::rational(1, 3)), {{"t", -8}}), -2.0, 1e-12);
}

TEST(EquivalentZero, SpecExamples) {
    EXPECT_EQ(equivalent_zero(Expr(0)).kind, ZeroVerdict::Kind::ProvenZero);
    EXPECT_EQ(equivalent_zero(pow(sin(t), 2) + pow(cos(t), 2) - 1).kind, ZeroVerdict::Kind::ProvenZero);
    const Expr e = pow(t, 2) - t * t * t;
    const ZeroVerdict v = equivalent_zero(e);
    ASSERT_EQ(v.kind, ZeroVerdict::Kind::Nonzero);
    EXPECT_GT(std::abs(eval_numeric(e, v.witness)), 1e-3);
    EXPECT_GT(std::abs(eval_numeric(e, {{"t", 1.7}})), 1.0);
}

TEST(EquivalentZero, NumericZeroForIdentitiesOutsideTheRules) {
    // tan^2 + 1 - 1/cos^2 is zero but not folded structurally
    const Expr e = pow(tan(t), 2) + 1 - pow(cos(t), -2);
    const ZeroVerdict v = equivalent_zero(e);
    EXPECT_EQ(v.kind, ZeroVerdict::Kind::NumericZero);
    EXPECT_EQ(v.samples, 24);
    EXPECT_LT(v.max_residual, 1e-9);
}

TEST(EquivalentZero, RedrawsSingularPoints) {
    ZeroOptions o;
    o.windows["t"] = {-0.2, 1.0};
    const ZeroVerdict v = equivalent_zero(ln(pow(t, 2)) - 2 * ln(t), o);
    EXPECT_EQ(v.kind, ZeroVerdict::Kind::NumericZero);
    EXPECT_FALSE(v.excluded.empty());
    ZeroOptions stuck;
    stuck.windows["t"] = {-2.0, -1.0};
    EXPECT_THROW(equivalent_zero(ln(t) + t, stuck), EvalError);
}
