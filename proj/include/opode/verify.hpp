#pragma once

#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "opode/eval.hpp"
#include "opode/expr.hpp"
#include "opode/parse.hpp"

namespace opode {

enum class SolutionKind { Particular, General, Implicit };
enum class Provenance { Dyson, Flow, Reduce, Part2Gen, User };
enum class VerifyMode { Symbolic, Numeric, Both };

const char *kind_name(SolutionKind k);
const char *provenance_name(Provenance p);
const char *mode_name(VerifyMode m);

struct VerifyOptions {
    VerifyMode mode = VerifyMode::Both;
    double tol = 1e-9;
    int samples = 24;
    std::uint64_t seed = 0x5eed0de;
    std::pair<double, double> t_window{0.3, 2.3};
    std::pair<double, double> c_window{-1.0, 1.0};
    /// Fixed values for symbolic parameters.
    std::map<std::string, double> parameters{{"m", 2.0}, {"n", 1.0}, {"p", 1.0}, {"q", 1.0}, {"l", 2.0}};
};

/// Evidence that a candidate solves its problem. Only the verification
/// routines construct these.
class VerificationRecord {
public:
    enum class Status { Proven, Numeric };

    Status status() const { return status_; }
    double max_residual() const { return max_residual_; }
    int samples() const { return samples_; }
    const std::vector<Bindings> &excluded() const { return excluded_; }
    /// Passed again at a tenfold stricter tolerance.
    bool strict() const { return strict_; }

private:
    VerificationRecord() = default;
    Status status_ = Status::Proven;
    double max_residual_ = 0.0;
    int samples_ = 0;
    std::vector<Bindings> excluded_;
    bool strict_ = true;

    friend struct VerifyAccess;
};

const char *status_name(VerificationRecord::Status s);

struct VerificationFailure {
    std::string reason;
    Bindings witness;
    double residual = 0.0;
};

using VerifyResult = std::variant<VerificationRecord, VerificationFailure>;

class Solution {
public:
    Solution(SolutionKind kind, Expr u, Provenance prov, VerificationRecord record,
             std::vector<Expr> side_conditions = {});

    SolutionKind kind() const { return kind_; }
    /// Explicit solution u(t[, c]); for implicit solutions the first
    /// integral I(t, u) with relation I(t, u) = c.
    const Expr &expr() const { return u_; }
    Provenance provenance() const { return prov_; }
    const VerificationRecord &record() const { return record_; }
    const std::vector<Expr> &side_conditions() const { return side_; }

    /// Free-form facts for reports (trial used, constant convention, ...).
    std::vector<std::pair<std::string, std::string>> notes;

private:
    SolutionKind kind_;
    Expr u_;
    Provenance prov_;
    VerificationRecord record_;
    std::vector<Expr> side_;
};

/// diff(u, t) - f(t, u), normalized.
Expr residual(const ODEProblem &p, const Expr &u);

VerifyResult verify(const ODEProblem &p, const Expr &u, const VerifyOptions &opts = {});

/// Numeric check of an implicit solution I(t, u) = c: I must stay constant
/// along numerically integrated trajectories of the problem.
VerifyResult verify_implicit(const ODEProblem &p, const Expr &first_integral, const VerifyOptions &opts = {});

/// Verifies and wraps; returns the failure when the candidate does not pass.
std::variant<Solution, VerificationFailure> certify(const ODEProblem &p, const Expr &u, SolutionKind kind,
                                                    Provenance prov, const VerifyOptions &opts = {},
                                                    std::vector<Expr> side_conditions = {});

/// Replaces every indefinite integral Int(f, x) by Int(f, x', lower, x),
/// which has the same derivative and can be evaluated.
Expr anchor_integrals(const Expr &e, const Expr &lower);

/// Bindings of the fixed parameters that appear in `e`.
Bindings parameter_bindings(const Expr &e, const VerifyOptions &opts);

}  // namespace opode
