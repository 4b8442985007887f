#pragma once

#include <optional>
#include <string>

#include "opode/expr.hpp"
#include "opode/outcome.hpp"
#include "opode/parse.hpp"

namespace opode {

struct FlowIterate {
    int index = 0;
    Expr u;              // u_k(t, c)
    bool closed = true;  // every integral evaluated
};

/// u_{k+1} = c + Int_a^t f(tau, u_k(tau, c)) dtau, or with the indefinite
/// integral (zero constant) when the problem has no base point.
FlowIterate picard_step(const ODEProblem &p, const FlowIterate &prev);

/// The starting iterate u_0 = c.
FlowIterate flow_seed(const ODEProblem &p);

struct FlowOptions {
    int max_iter = 20;
    int window = 3;
    /// Assert that t-degrees <= k are frozen after iterate k (polynomial iterates only).
    bool t_degree_stabilization = true;
    std::size_t node_cap = 200000;
    VerifyOptions verify;
};

/// Picard iteration with symbolic constant. Accepts a structural fixed
/// point, or a verified survived part of the iterate sequence. Returns
/// general solutions with provenance flow.
Outcome solve_flow(const ODEProblem &p, const FlowOptions &opts = {});

/// z_n(t, c) with z_{k+1} = c - Int_a^t f(tau, c) dz_k/dc dtau, z_0 = c; it
/// solves z_t + f(t, c) z_c = 0 up to O((t - a)^n).
Expr first_integral(const ODEProblem &p, int n);

/// Terms of e of degree <= k in (t - a), where a is the base point (0 when
/// absent). Empty when e is not polynomial in t.
std::optional<Expr> t_prefix(const ODEProblem &p, const Expr &e, int k);

}  // namespace opode
