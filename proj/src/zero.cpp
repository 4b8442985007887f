#include "opode/zero.hpp"

#include <cmath>
#include <random>

namespace opode {

const char *verdict_name(ZeroVerdict::Kind k) {
    switch (k) {
    case ZeroVerdict::Kind::ProvenZero: return "proven-zero";
    case ZeroVerdict::Kind::NumericZero: return "numeric-zero";
    case ZeroVerdict::Kind::Nonzero: return "nonzero";
    }
    return "?";
}

ZeroVerdict equivalent_zero(const Expr &e, const ZeroOptions &opts) {
    ZeroVerdict v;
    if (e.is_zero()) return v;

    v.kind = ZeroVerdict::Kind::NumericZero;
    std::mt19937_64 rng(opts.seed);
    const std::vector<Expr> terms = terms_of(e);
    std::vector<std::string> names;
    for (const std::string &n : free_names(e)) {
        if (!opts.fixed.contains(n)) names.push_back(n);
    }

    for (int i = 0; i < opts.samples; ++i) {
        for (int attempt = 0;; ++attempt) {
            Bindings b = opts.fixed;
            for (const std::string &n : names) {
                auto w = opts.windows.find(n);
                const double lo = w == opts.windows.end() ? opts.lo : w->second.first;
                const double hi = w == opts.windows.end() ? opts.hi : w->second.second;
                b.set(n, std::uniform_real_distribution<double>(lo, hi)(rng));
            }
            try {
                double total = 0.0;
                double scale = 1.0;
                for (const Expr &t : terms) {
                    const double x = eval_numeric(t, b);
                    total += x;
                    scale += std::abs(x);
                }
                const double rel = std::abs(total) / scale;
                ++v.samples;
                if (rel > v.max_residual) v.max_residual = rel;
                if (!(rel <= opts.tol)) {
                    v.kind = ZeroVerdict::Kind::Nonzero;
                    v.witness = b;
                    return v;
                }
                break;
            } catch (const EvalError &err) {
                if (err.kind() != EvalError::Kind::Domain || attempt >= opts.redraws) throw;
                v.excluded.push_back(b);
            }
        }
    }
    return v;
}

}  // namespace opode
