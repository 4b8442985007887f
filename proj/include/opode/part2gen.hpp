#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "opode/eval.hpp"
#include "opode/expr.hpp"
#include "opode/parse.hpp"
#include "opode/verify.hpp"

namespace opode {

class SeedError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A known particular solution u0(t) and the constant value c0 it belongs to.
struct ParticularSeed {
    Expr u0;
    Expr c0;
};

/// Rejects u0 unless its residual passes equivalent_zero. c0 defaults to
/// u0 at the base point, or to the variable "c0" without one.
ParticularSeed make_seed(const ODEProblem &p, const Expr &u0, std::optional<Expr> c0 = std::nullopt,
                         const VerifyOptions &v = {});

/// E(t) = exp(Int_a^t df/du(tau, u0(tau)) dtau); E(a) = 1 with a base point.
Expr variational_exponent(const ODEProblem &p, const ParticularSeed &seed);

/// For f = q0 + q1 u + q2 u^2: u = u0 + E / (C - Int_a^t q2 E), verified,
/// with the constant named C. The seed itself is the reciprocal constant
/// 1/C = 0. Throws UnsupportedError when f is not quadratic in u.
Solution riccati_general(const ODEProblem &p, const ParticularSeed &seed, const VerifyOptions &v = {});

/// u0 + (c - c0) E: the first-order term in (c - c0) of the general solution.
Expr first_order_general(const ODEProblem &p, const ParticularSeed &seed);

struct DudcOptions {
    int samples = 16;
    std::pair<double, double> t_window{0.3, 2.3};
    std::pair<double, double> c_window{-1.0, 1.0};
    double rtol = 1e-6;
    std::uint64_t seed = 0x5eed0de;
    int redraws = 5;
    /// Paths on which |u| exceeds this are treated as crossing a pole.
    double blowup = 1e3;
    std::map<std::string, double> parameters = VerifyOptions{}.parameters;
};

struct DudcReport {
    bool pass = false;
    double max_deviation = 0.0;  // relative
    int samples = 0;
    std::vector<Bindings> excluded;
    Bindings worst;
};

/// Compares du/dc(t) with du/dc(t0) * exp(Int_t0^t df/du(tau, u(tau, c)) dtau)
/// at sampled (t, c); t0 is the base point, or the window start without
/// one. When u(t0, c) = c the factor du/dc(t0) is 1.
DudcReport dudc_check(const ODEProblem &p, const Expr &u, const std::string &constant, const DudcOptions &o = {});

/// Same check on a general solution; the constant is the problem's, or C
/// for solutions from riccati_general.
DudcReport dudc_check(const ODEProblem &p, const Solution &general, const DudcOptions &o = {});

}  // namespace opode
