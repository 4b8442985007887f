#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "opode/eval.hpp"
#include "opode/expr.hpp"

namespace opode {

struct ZeroOptions {
    int samples = 24;
    double lo = 0.3;
    double hi = 2.3;
    double tol = 1e-9;
    std::uint64_t seed = 0x5eed0de;
    int redraws = 5;
    std::map<std::string, std::pair<double, double>> windows;  // per-name overrides
    Bindings fixed;                                            // names held at a value
};

struct ZeroVerdict {
    enum class Kind { ProvenZero, NumericZero, Nonzero };
    Kind kind = Kind::ProvenZero;
    double max_residual = 0.0;  // largest scaled residual seen
    Bindings witness;           // failing point when Nonzero
    int samples = 0;
    std::vector<Bindings> excluded;  // singular draws that were replaced

    bool is_zero() const { return kind != Kind::Nonzero; }
};

const char *verdict_name(ZeroVerdict::Kind k);

/// Zero test: structural first, then seeded random probing. Throws
/// EvalError when a sample point stays singular after all redraws.
ZeroVerdict equivalent_zero(const Expr &e, const ZeroOptions &opts = {});

}  // namespace opode
