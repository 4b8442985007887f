#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "opode/eval.hpp"
#include "opode/expr.hpp"

namespace opode::chronos {

using Matrix = Eigen::MatrixXd;

class NonfiniteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// tau -> n x n real matrix.
class MatrixPath {
public:
    MatrixPath(int n, std::function<Matrix(double)> eval);

    /// Row-major entries in `var`, evaluated with eval_numeric.
    static MatrixPath from_exprs(int n, std::vector<Expr> entries, const std::string &var = "t", Bindings fixed = {});
    static MatrixPath constant(const Matrix &m);
    /// Entries are polynomials of degree <= `degree` with coefficients
    /// drawn uniformly from [-1, 1] (rounded to 1e-3).
    static MatrixPath random_polynomial(int n, int degree, std::uint64_t seed);

    int dim() const { return n_; }
    /// Throws NonfiniteError for non-finite entries.
    Matrix operator()(double tau) const;
    const std::vector<Expr> &entries() const { return entries_; }

    friend MatrixPath operator+(const MatrixPath &x, const MatrixPath &y);
    friend MatrixPath operator*(double s, const MatrixPath &x);

private:
    int n_;
    std::function<Matrix(double)> eval_;
    std::vector<Expr> entries_;  // empty unless built from expressions
};

struct OrderedProduct {
    double a = 0.0, b = 0.0;
    int steps = 1;
    Matrix result;
    double error = 0.0;  // Richardson estimate from the 2N product; 0 when not requested
};

/// prod_{i=N..1} exp(L(tau_i) h), h = (b - a)/N, tau_i the midpoint of the
/// i-th slice, later slices on the left.
OrderedProduct ordered_exp(const MatrixPath &L, double a, double b, int N, bool estimate_error = true);

/// prod_{i=1..N} exp(L(tau_i) h): the same slices, earlier ones on the left.
Matrix reverse_ordered_exp(const MatrixPath &L, double a, double b, int N);

/// U' = L(t) U, U(a) = I by an adaptive Dormand-Prince integrator.
Matrix integrate_oracle(const MatrixPath &L, double a, double b, double tol = 1e-13);

struct CheckReport {
    std::string name;
    double deviation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

CheckReport check_composition(const MatrixPath &L, double a, double m, double b, int N);
/// Forward product times the reverse-ordered product of -L.
CheckReport check_inverse(const MatrixPath &L, double a, double t, int N);
/// T e^{int (A+B)} against T e^{int A} * T e^{int V B U}, where
/// U = T e^{int_a^tau A} and V = T0 e^{-int_a^tau A}.
CheckReport check_sum_identity(const MatrixPath &A, const MatrixPath &B, double a, double t, int N);
/// T e^{int A} * T e^{int B} against T e^{int (A + U B V)}.
CheckReport check_conjugation_identity(const MatrixPath &A, const MatrixPath &B, double a, double t, int N);
/// det T e^{int L} against exp(int trace L).
CheckReport check_liouville(const MatrixPath &L, double a, double b, int N);
/// Ordered product against integrate_oracle.
CheckReport check_oracle(const MatrixPath &L, double a, double b, int N, double tol = 1e-6);

struct ConvergenceReport {
    std::vector<int> steps;
    std::vector<double> errors;
    double slope = 0.0;  // least-squares fit of log error against log N
};

ConvergenceReport convergence_order(const MatrixPath &L, double a, double b, const Matrix &reference,
                                    const std::vector<int> &steps);

/// Scalar flow x' = f(tau, x), x(a) = x0. The generalized shift applied
/// to g(t, .) is obtained by integrating its generator f * dg/dx along the
/// flow; the check compares it with g(t, X(t)).
CheckReport check_homomorphy(const Expr &f, const Expr &g, double a, double t, double x0,
                             const std::string &tvar = "t", const std::string &xvar = "x");

/// `count` seeded pairs: f polynomial in (t, x) of degree <= 2 in x, g
/// polynomial of degree <= 3 in x plus a multiple of sin(x); window (0, 1/2),
/// x0 drawn from [-1/2, 1/2].
std::vector<CheckReport> homomorphy_suite(std::uint64_t seed, int count);

/// The fixed oracle suite: oscillator path [[0,1],[-tau,0]] on (0,1) with
/// N = 10^4, convergence order, Liouville, and the identity checks on five
/// seeded random 3x3 paths.
std::vector<CheckReport> oracle_suite(std::uint64_t seed = 1);

/// [[0, 1], [-tau, 0]].
MatrixPath oscillator_path();

}  // namespace opode::chronos
