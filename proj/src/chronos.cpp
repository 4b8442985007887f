#include "opode/chronos.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "opode/calculus.hpp"

namespace opode::chronos {

namespace {

using State = std::vector<double>;

Matrix identity(int n) { return Matrix::Identity(n, n); }

double rel_dev(const Matrix &x, const Matrix &y) { return (x - y).norm() / std::max(1.0, y.norm()); }

CheckReport report(std::string name, double dev, double tol, std::string detail = {}) {
    return {std::move(name), dev, tol, dev < tol, std::move(detail)};
}

Matrix product(const std::vector<Matrix> &mids, double h, bool later_left) {
    Matrix out = identity(static_cast<int>(mids.front().rows()));
    for (const Matrix &m : mids) {
        const Matrix e = (m * h).exp();
        out = later_left ? Matrix(e * out) : Matrix(out * e);
    }
    return out;
}

std::vector<Matrix> midpoints(const MatrixPath &L, double a, double b, int N) {
    std::vector<Matrix> out;
    out.reserve(N);
    const double h = (b - a) / N;
    for (int i = 0; i < N; ++i) out.push_back(L(a + (i + 0.5) * h));
    return out;
}

// U = T e^{int_a^tau A} and V = T0 e^{-int_a^tau A} at the slice midpoints,
// each advanced by two-slice ordered products over consecutive midpoints.
void conjugators(const MatrixPath &A, double a, double t, int N, std::vector<Matrix> &U, std::vector<Matrix> &V) {
    const double h = (t - a) / N;
    const MatrixPath negA = -1.0 * A;
    Matrix u = ordered_exp(A, a, a + h / 2, 1, false).result;
    Matrix v = reverse_ordered_exp(negA, a, a + h / 2, 1);
    U.assign(1, u);
    V.assign(1, v);
    for (int i = 1; i < N; ++i) {
        const double lo = a + (i - 0.5) * h, hi = a + (i + 0.5) * h;
        u = ordered_exp(A, lo, hi, 2, false).result * u;
        v = v * reverse_ordered_exp(negA, lo, hi, 2);
        U.push_back(u);
        V.push_back(v);
    }
}

}  // namespace

MatrixPath::MatrixPath(int n, std::function<Matrix(double)> eval) : n_(n), eval_(std::move(eval)) {}

MatrixPath MatrixPath::from_exprs(int n, std::vector<Expr> entries, const std::string &var, Bindings fixed) {
    if (static_cast<int>(entries.size()) != n * n) throw std::invalid_argument("matrix path needs n*n entries");
    MatrixPath out(n, [n, entries, var, fixed](double tau) {
        Bindings b = fixed;
        b.set(var, tau);
        Matrix m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = eval_numeric(entries[i * n + j], b);
        return m;
    });
    out.entries_ = std::move(entries);
    return out;
}

MatrixPath MatrixPath::constant(const Matrix &m) {
    return MatrixPath(static_cast<int>(m.rows()), [m](double) { return m; });
}

MatrixPath MatrixPath::random_polynomial(int n, int degree, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> coef(-1000, 1000);
    const Expr t = Expr::variable("t");
    std::vector<Expr> entries;
    for (int k = 0; k < n * n; ++k) {
        std::vector<Expr> terms;
        for (int d = 0; d <= degree; ++d) terms.push_back(Expr(Rational(coef(rng), 1000)) * pow(t, Expr(d)));
        entries.push_back(Expr::sum(terms));
    }
    return from_exprs(n, std::move(entries));
}

Matrix MatrixPath::operator()(double tau) const {
    Matrix m;
    try {
        m = eval_(tau);
    } catch (const EvalError &e) {
        throw NonfiniteError(std::string("matrix path undefined: ") + e.what());
    }
    if (!m.allFinite()) {
        std::ostringstream os;
        os << "non-finite matrix entry at tau = " << tau;
        throw NonfiniteError(os.str());
    }
    return m;
}

MatrixPath operator+(const MatrixPath &x, const MatrixPath &y) {
    if (x.dim() != y.dim()) throw std::invalid_argument("matrix path dimensions differ");
    return MatrixPath(x.dim(), [x, y](double tau) { return Matrix(x(tau) + y(tau)); });
}

MatrixPath operator*(double s, const MatrixPath &x) {
    return MatrixPath(x.dim(), [s, x](double tau) { return Matrix(s * x(tau)); });
}

OrderedProduct ordered_exp(const MatrixPath &L, double a, double b, int N, bool estimate_error) {
    if (N < 1) throw std::invalid_argument("ordered_exp needs N >= 1");
    if (a > b) throw std::invalid_argument("ordered_exp needs a <= b");
    OrderedProduct out;
    out.a = a;
    out.b = b;
    out.steps = N;
    out.result = product(midpoints(L, a, b, N), (b - a) / N, true);
    if (estimate_error) {
        const Matrix fine = product(midpoints(L, a, b, 2 * N), (b - a) / (2 * N), true);
        // Second-order method: the N-step error is about 4/3 of the difference.
        out.error = (out.result - fine).norm() * 4.0 / 3.0;
    }
    return out;
}

Matrix reverse_ordered_exp(const MatrixPath &L, double a, double b, int N) {
    if (N < 1) throw std::invalid_argument("reverse_ordered_exp needs N >= 1");
    return product(midpoints(L, a, b, N), (b - a) / N, false);
}

Matrix integrate_oracle(const MatrixPath &L, double a, double b, double tol) {
    namespace ode = boost::numeric::odeint;
    const int n = L.dim();
    State y(n * n, 0.0);
    for (int i = 0; i < n; ++i) y[i * n + i] = 1.0;
    auto rhs = [&](const State &x, State &dx, double tau) {
        const Matrix m = L(tau);
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> U(x.data(), n, n);
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> dU(dx.data(), n, n);
        dU = m * U;
    };
    ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<State>>(tol, tol), rhs, y, a, b,
                            (b - a) / 1000);
    Matrix out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = y[i * n + j];
    return out;
}

CheckReport check_composition(const MatrixPath &L, double a, double m, double b, int N) {
    if (!(a <= m && m <= b)) throw std::invalid_argument("check_composition needs a <= m <= b");
    const Matrix whole = ordered_exp(L, a, b, 2 * N, false).result;
    const Matrix left = ordered_exp(L, a, m, N, false).result;
    const Matrix right = ordered_exp(L, m, b, N, false).result;
    return report("composition", rel_dev(right * left, whole), 1e-6);
}

CheckReport check_inverse(const MatrixPath &L, double a, double t, int N) {
    const Matrix fwd = ordered_exp(L, a, t, N, false).result;
    const Matrix rev = reverse_ordered_exp(-1.0 * L, a, t, N);
    return report("inverse", (fwd * rev - identity(L.dim())).norm(), 1e-6);
}

CheckReport check_sum_identity(const MatrixPath &A, const MatrixPath &B, double a, double t, int N) {
    const Matrix lhs = ordered_exp(A + B, a, t, N, false).result;
    std::vector<Matrix> U, V;
    conjugators(A, a, t, N, U, V);
    const std::vector<Matrix> bs = midpoints(B, a, t, N);
    std::vector<Matrix> inner;
    inner.reserve(N);
    for (int i = 0; i < N; ++i) inner.push_back(V[i] * bs[i] * U[i]);
    const Matrix rhs = ordered_exp(A, a, t, N, false).result * product(inner, (t - a) / N, true);
    return report("sum identity", rel_dev(rhs, lhs), 1e-5);
}

CheckReport check_conjugation_identity(const MatrixPath &A, const MatrixPath &B, double a, double t, int N) {
    const Matrix lhs = ordered_exp(A, a, t, N, false).result * ordered_exp(B, a, t, N, false).result;
    std::vector<Matrix> U, V;
    conjugators(A, a, t, N, U, V);
    const std::vector<Matrix> as = midpoints(A, a, t, N), bs = midpoints(B, a, t, N);
    std::vector<Matrix> inner;
    inner.reserve(N);
    for (int i = 0; i < N; ++i) inner.push_back(as[i] + U[i] * bs[i] * V[i]);
    return report("conjugation identity", rel_dev(product(inner, (t - a) / N, true), lhs), 1e-5);
}

CheckReport check_liouville(const MatrixPath &L, double a, double b, int N) {
    const double det = ordered_exp(L, a, b, N, false).result.determinant();
    const double tr = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double tau) { return L(tau).trace(); }, a, b, 10, 1e-14);
    const double expected = std::exp(tr);
    return report("liouville", std::abs(det - expected) / std::max(1.0, std::abs(expected)), 1e-6);
}

CheckReport check_oracle(const MatrixPath &L, double a, double b, int N, double tol) {
    const OrderedProduct op = ordered_exp(L, a, b, N);
    const Matrix ref = integrate_oracle(L, a, b);
    std::ostringstream os;
    os << "N=" << N << " richardson=" << op.error;
    return report("ordered_exp vs integrator", rel_dev(op.result, ref), tol, os.str());
}

ConvergenceReport convergence_order(const MatrixPath &L, double a, double b, const Matrix &reference,
                                    const std::vector<int> &steps) {
    ConvergenceReport out;
    out.steps = steps;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int N : steps) {
        const double err = (ordered_exp(L, a, b, N, false).result - reference).norm();
        out.errors.push_back(err);
        const double x = std::log(static_cast<double>(N)), y = std::log(err);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double k = static_cast<double>(steps.size());
    out.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    return out;
}

CheckReport check_homomorphy(const Expr &f, const Expr &g, double a, double t, double x0, const std::string &tvar,
                             const std::string &xvar) {
    namespace ode = boost::numeric::odeint;
    const Expr gx = diff(g, xvar);
    auto at = [&](const Expr &e, double tv, double xv) {
        Bindings b;
        b.set(tvar, tv).set(xvar, xv);
        return eval_numeric(e, b);
    };
    // y = (X, G): X' = f(tau, X); G' = f(tau, X) * g_x(t, X), t frozen.
    State y{x0, at(g, t, x0)};
    auto rhs = [&](const State &s, State &ds, double tau) {
        const double fx = at(f, tau, s[0]);
        ds[0] = fx;
        ds[1] = fx * at(gx, t, s[0]);
    };
    try {
        ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<State>>(1e-13, 1e-13), rhs, y, a, t,
                                (t - a) / 1000);
    } catch (const std::exception &e) {
        return {"homomorphy", INFINITY, 1e-6, false, std::string("integration failure: ") + e.what()};
    }
    if (!std::isfinite(y[0]) || !std::isfinite(y[1])) {
        return {"homomorphy", INFINITY, 1e-6, false, "integration failure: non-finite flow"};
    }
    const double composed = at(g, t, y[0]);
    std::ostringstream os;
    os << "X(t)=" << y[0] << " shifted=" << y[1] << " composed=" << composed;
    return report("homomorphy", std::abs(y[1] - composed) / std::max(1.0, std::abs(composed)), 1e-6, os.str());
}

std::vector<CheckReport> homomorphy_suite(std::uint64_t seed, int count) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> coef(-1000, 1000);
    auto r = [&] { return Expr(Rational(coef(rng), 1000)); };
    const Expr t = Expr::variable("t"), x = Expr::variable("x");
    std::vector<CheckReport> out;
    for (int k = 0; k < count; ++k) {
        const Expr f = r() + r() * t + (r() + r() * t) * x + r() * pow(x, 2);
        const Expr g = r() + r() * x + r() * t * pow(x, 2) + r() * pow(x, 3) + r() * sin(x);
        const double x0 = coef(rng) / 2000.0;
        CheckReport c = check_homomorphy(f, g, 0.0, 0.5, x0);
        c.name += " #" + std::to_string(k + 1);
        out.push_back(std::move(c));
    }
    return out;
}

MatrixPath oscillator_path() {
    const Expr t = Expr::variable("t");
    return MatrixPath::from_exprs(2, {Expr(0), Expr(1), -t, Expr(0)});
}

std::vector<CheckReport> oracle_suite(std::uint64_t seed) {
    std::vector<CheckReport> out;
    const MatrixPath osc = oscillator_path();
    out.push_back(check_oracle(osc, 0.0, 1.0, 10000));

    const ConvergenceReport conv = convergence_order(osc, 0.0, 1.0, integrate_oracle(osc, 0.0, 1.0), {100, 1000, 10000});
    std::ostringstream os;
    for (std::size_t i = 0; i < conv.steps.size(); ++i) os << (i ? " " : "") << conv.steps[i] << ":" << conv.errors[i];
    out.push_back({"convergence order", std::abs(conv.slope + 2.0), 0.3, std::abs(conv.slope + 2.0) < 0.3,
                   "slope=" + std::to_string(conv.slope) + " " + os.str()});

    out.push_back(check_liouville(osc, 0.0, 1.0, 10000));
    out.push_back(check_composition(osc, 0.0, 0.4, 1.0, 10000));
    out.push_back(check_inverse(osc, 0.0, 1.0, 10000));
    for (int k = 0; k < 5; ++k) {
        const MatrixPath A = MatrixPath::random_polynomial(3, 3, seed * 1000 + 2 * k);
        const MatrixPath B = MatrixPath::random_polynomial(3, 3, seed * 1000 + 2 * k + 1);
        const std::string tag = " #" + std::to_string(k + 1);
        CheckReport s = check_sum_identity(A, B, 0.0, 1.0, 10000);
        s.name += tag;
        out.push_back(s);
        CheckReport c = check_conjugation_identity(A, B, 0.0, 1.0, 10000);
        c.name += tag;
        out.push_back(c);
        CheckReport i = check_inverse(A, 0.0, 1.0, 10000);
        i.name += tag;
        out.push_back(i);
    }
    return out;
}

}  // namespace opode::chronos
