#pragma once

#include <random>
#include <string>
#include <vector>

#include "opode/expr.hpp"

namespace opode::gen {

// Random unnormalized trees over t, c and the parameter p.
class ExprGen {
public:
    explicit ExprGen(std::uint64_t seed) : rng_(seed) {}

    Expr leaf() {
        switch (pick(6)) {
        case 0: return Expr(static_cast<int>(pick(7)) - 3);
        case 1: return Expr::rational(static_cast<int>(pick(9)) - 4, 1 + pick(4));
        case 2:
        case 3: return var("t");
        case 4: return var("c");
        default: return par("p");
        }
    }

    Expr raw_tree(int depth) {
        if (depth <= 0 || pick(4) == 0) return leaf();
        switch (pick(5)) {
        case 0: return raw::sum(children(depth));
        case 1: return raw::product(children(depth));
        case 2: return raw::power(raw_tree(depth - 1), Expr(static_cast<int>(pick(5)) - 1));
        case 3: {
            static const Func fs[] = {Func::Exp, Func::Sin, Func::Cos, Func::Arctan};
            return raw::call(fs[pick(4)], raw_tree(depth - 1));
        }
        default: return raw::call(Func::Ln, raw::sum({Expr(2), raw::power(raw_tree(depth - 1), Expr(2))}));
        }
    }

    // Integrands inside the integrator's rule class, in t.
    Expr rule_class_term() {
        const Expr t = var("t");
        const Expr k = Expr(static_cast<int>(pick(4)));
        const Expr coef = Expr::rational(static_cast<int>(pick(9)) - 4 == 0 ? 1 : static_cast<int>(pick(9)) - 4, 1 + pick(3));
        const Expr alpha = Expr(1 + static_cast<int>(pick(3))) * (pick(2) ? 1 : -1);
        const Expr beta = Expr::rational(static_cast<int>(pick(5)) - 2, 2);
        switch (pick(9)) {
        case 0: return coef * pow(t, Expr(static_cast<int>(pick(9)) - 6));
        case 1: return coef * pow(t, k) * exp(alpha * t + beta);
        case 2: return coef * pow(t, k) * pow(ln(t), Expr(1 + static_cast<int>(pick(3))));
        case 3: return coef * pow(t, -1) * pow(ln(t), Expr(static_cast<int>(pick(4))));
        case 4: return coef * pow(t, k) * sin(alpha * t + beta);
        case 5: return coef * pow(t, k) * cos(alpha * t + beta);
        case 6: {
            const Expr h = pow(t, 2) + alpha;
            return coef * t * pow(h, Expr(static_cast<int>(pick(5)) - 2));
        }
        case 7: return coef * cos(t) * pow(sin(t), Expr(1 + static_cast<int>(pick(4))));
        default: return coef * (1 + t) * exp(t) * ln(t);
        }
    }

    Expr rule_class(int max_terms = 3) {
        std::vector<Expr> terms;
        const unsigned n = 1 + pick(static_cast<unsigned>(max_terms));
        for (unsigned i = 0; i < n; ++i) terms.push_back(rule_class_term());
        return Expr::sum(terms);
    }

    unsigned pick(unsigned n) { return std::uniform_int_distribution<unsigned>(0, n - 1)(rng_); }
    std::mt19937_64 &rng() { return rng_; }

private:
    std::vector<Expr> children(int depth) {
        std::vector<Expr> out;
        const unsigned n = 2 + pick(2);
        for (unsigned i = 0; i < n; ++i) out.push_back(raw_tree(depth - 1));
        return out;
    }

    std::mt19937_64 rng_;
};

}  // namespace opode::gen
