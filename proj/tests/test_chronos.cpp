#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "opode/chronos.hpp"
#include "opode/parse.hpp"

using namespace opode;
using namespace opode::chronos;

namespace {
const Expr t = var("t");

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(rows.size(), rows.begin()->size());
    int i = 0;
    for (auto r : rows) {
        int j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

MatrixPath diagonal_path() { return MatrixPath::from_exprs(2, {t * t, Expr(0), Expr(0), sin(t)}); }
}  // namespace

TEST(OrderedExp, ConstantPath) {
    const Matrix L = mat({{0.3, -1.2}, {0.7, 0.1}});
    const OrderedProduct op = ordered_exp(MatrixPath::constant(L), 0.5, 2.0, 37);
    EXPECT_LT((op.result - (L * 1.5).exp()).norm(), 1e-10);
    EXPECT_LT(op.error, 1e-12);
}

TEST(OrderedExp, DiagonalPath) {
    const OrderedProduct op = ordered_exp(diagonal_path(), 0.0, 1.0, 20000);
    // exp of the integrated diagonal: 1/3 and 1 - cos 1.
    EXPECT_NEAR(op.result(0, 0), std::exp(1.0 / 3.0), 1e-9);
    EXPECT_NEAR(op.result(1, 1), std::exp(1.0 - std::cos(1.0)), 1e-9);
    EXPECT_EQ(op.result(0, 1), 0.0);
}

TEST(OrderedExp, OscillatorMatchesIntegrator) {
    const CheckReport r = check_oracle(oscillator_path(), 0.0, 1.0, 10000);
    EXPECT_TRUE(r.pass) << r.deviation;
    EXPECT_LT(r.deviation, 1e-6);
}

TEST(OrderedExp, LaterTimesOnTheLeft) {
    // Reversing the order gives the reverse-ordered product, which differs
    // for non-commuting slices and is not the solution of U' = L U.
    const MatrixPath osc = oscillator_path();
    const Matrix ref = integrate_oracle(osc, 0.0, 1.0);
    EXPECT_GT((reverse_ordered_exp(osc, 0.0, 1.0, 10000) - ref).norm(), 1e-3);
}

TEST(OrderedExp, Preconditions) {
    EXPECT_THROW(ordered_exp(oscillator_path(), 1.0, 0.0, 10), std::invalid_argument);
    EXPECT_THROW(ordered_exp(oscillator_path(), 0.0, 1.0, 0), std::invalid_argument);
    const MatrixPath bad = MatrixPath::from_exprs(1, {1 / (t - Expr(Rational(1, 2)))});
    EXPECT_THROW(ordered_exp(bad, 0.0, 1.0, 1), NonfiniteError);
}

TEST(OrderedExp, ConvergenceOrder) {
    const MatrixPath osc = oscillator_path();
    const ConvergenceReport c = convergence_order(osc, 0.0, 1.0, integrate_oracle(osc, 0.0, 1.0), {100, 1000, 10000});
    EXPECT_NEAR(c.slope, -2.0, 0.3);
}

TEST(Checks, Composition) {
    const MatrixPath k = MatrixPath::constant(mat({{0.0, 1.0}, {-2.0, 0.5}}));
    EXPECT_LT(check_composition(k, 0.0, 0.3, 1.0, 50).deviation, 1e-13);
    const MatrixPath osc = oscillator_path();
    // m = a: the right factor carries everything.
    EXPECT_TRUE(check_composition(osc, 0.0, 0.0, 1.0, 1000).pass);
    EXPECT_TRUE(check_composition(osc, 0.0, 0.35, 1.0, 10000).pass);
}

TEST(Checks, Inverse) {
    EXPECT_EQ(check_inverse(MatrixPath::constant(Matrix::Zero(3, 3)), 0.0, 1.0, 10).deviation, 0.0);
    EXPECT_LT(check_inverse(MatrixPath::constant(mat({{1.0, 2.0}, {0.0, -1.0}})), 0.0, 1.0, 10).deviation, 1e-13);
    EXPECT_TRUE(check_inverse(oscillator_path(), 0.0, 1.0, 10000).pass);
}

TEST(Checks, IdentitiesWithZeroB) {
    const MatrixPath A = MatrixPath::random_polynomial(3, 3, 11);
    const MatrixPath Z = MatrixPath::constant(Matrix::Zero(3, 3));
    EXPECT_LT(check_sum_identity(A, Z, 0.0, 1.0, 200).deviation, 1e-13);
    EXPECT_LT(check_conjugation_identity(A, Z, 0.0, 1.0, 200).deviation, 1e-13);
}

TEST(Checks, IdentitiesWithCommutingPaths) {
    const MatrixPath A = MatrixPath::constant(mat({{0.4, 0.0}, {0.0, -0.3}}));
    const MatrixPath B = MatrixPath::constant(mat({{-0.1, 0.0}, {0.0, 0.9}}));
    EXPECT_LT(check_sum_identity(A, B, 0.0, 1.0, 100).deviation, 1e-12);
    EXPECT_LT(check_conjugation_identity(A, B, 0.0, 1.0, 100).deviation, 1e-12);
}

TEST(Checks, IdentitiesOnRandomPaths) {
    for (std::uint64_t s = 0; s < 2; ++s) {
        const MatrixPath A = MatrixPath::random_polynomial(3, 3, 100 + 2 * s);
        const MatrixPath B = MatrixPath::random_polynomial(3, 3, 101 + 2 * s);
        EXPECT_TRUE(check_sum_identity(A, B, 0.0, 1.0, 4000).pass);
        EXPECT_TRUE(check_conjugation_identity(A, B, 0.0, 1.0, 4000).pass);
    }
}

TEST(Checks, NonCommutingPathsNeedTheConjugatedFactor) {
    // Both identities hold, while the plain product of the two exponentials
    // is far from the exponential of the sum.
    const MatrixPath A = MatrixPath::random_polynomial(3, 3, 7);
    const MatrixPath B = MatrixPath::random_polynomial(3, 3, 8);
    const CheckReport good = check_sum_identity(A, B, 0.0, 1.0, 2000);
    const CheckReport swapped = check_conjugation_identity(A, B, 0.0, 1.0, 2000);
    ASSERT_TRUE(good.pass);
    ASSERT_TRUE(swapped.pass);
    const Matrix ab = ordered_exp(A + B, 0.0, 1.0, 2000, false).result;
    const Matrix prod = ordered_exp(A, 0.0, 1.0, 2000, false).result * ordered_exp(B, 0.0, 1.0, 2000, false).result;
    EXPECT_GT((ab - prod).norm() / ab.norm(), 1e-3);
}

TEST(Checks, Liouville) {
    EXPECT_TRUE(check_liouville(oscillator_path(), 0.0, 1.0, 10000).pass);
    const CheckReport r = check_liouville(MatrixPath::random_polynomial(3, 2, 3), 0.0, 1.0, 10000);
    EXPECT_TRUE(r.pass) << r.deviation;
}

TEST(Homomorphy, Examples) {
    const Expr x = var("x");
    CheckReport r = check_homomorphy(Expr(0), pow(x, 2) + t, 0.0, 0.7, 0.3);
    EXPECT_TRUE(r.pass);
    r = check_homomorphy(sin(t) * x, x, 0.0, 0.7, 0.3);
    EXPECT_TRUE(r.pass);
    // f = x^2, g = x^3 on (0, 0.5) from 0.5: X = 0.5/(1 - 0.5 t).
    r = check_homomorphy(pow(x, 2), pow(x, 3), 0.0, 0.5, 0.5);
    EXPECT_TRUE(r.pass) << r.detail;
    EXPECT_NEAR(r.deviation, 0.0, 1e-6);
}

TEST(Homomorphy, ReportsBlowUp) {
    const Expr x = var("x");
    const CheckReport r = check_homomorphy(pow(x, 2), x, 0.0, 3.0, 1.0);
    EXPECT_FALSE(r.pass);
    EXPECT_FALSE(r.detail.empty());
}

TEST(OracleSuite, AllPass) {
    for (const CheckReport &r : oracle_suite()) EXPECT_TRUE(r.pass) << r.name << " " << r.deviation << " " << r.detail;
}
