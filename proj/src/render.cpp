#include "opode/render.hpp"

#include <stdexcept>

namespace opode {

namespace {

bool negative_term(const Expr &e) {
    if (e.is_number()) return e.value() < 0;
    return e.kind() == Kind::Product && e.args()[0].is_number() && e.args()[0].value() < 0;
}

Expr negate_term(const Expr &e) { return -e; }

std::string number_plain(const Rational &v) { return v.str(); }

// --- plain ----------------------------------------------------------------

std::string plain(const Expr &e);

std::string plain_factor(const Expr &f) {
    switch (f.kind()) {
    case Kind::Sum: return "(" + plain(f) + ")";
    case Kind::Number:
        if (f.value() < 0 || !f.is_integer()) return "(" + plain(f) + ")";
        return plain(f);
    default: return plain(f);
    }
}

std::string plain_power(const Expr &e) {
    const Expr &b = e.base();
    const Expr &x = e.exponent();
    std::string bs;
    switch (b.kind()) {
    case Kind::Sum:
    case Kind::Product:
    case Kind::Power: bs = "(" + plain(b) + ")"; break;
    case Kind::Number: bs = (b.value() < 0 || !b.is_integer()) ? "(" + plain(b) + ")" : plain(b); break;
    default: bs = plain(b);
    }
    std::string xs;
    if ((x.is_integer() && x.value() >= 0) || x.is_symbol() || x.kind() == Kind::Call) {
        xs = plain(x);
    } else {
        xs = "(" + plain(x) + ")";
    }
    return bs + "^" + xs;
}

std::string plain_product(const Expr &e) {
    std::string out;
    auto args = e.args();
    std::size_t i = 0;
    if (args[0].is_number()) {
        const Rational &c = args[0].value();
        if (c == -1) {
            out = "-";
        } else {
            out = number_plain(c) + "*";
        }
        i = 1;
    }
    for (std::size_t k = i; k < args.size(); ++k) {
        if (k > i) out += "*";
        out += plain_factor(args[k]);
    }
    return out;
}

std::string plain(const Expr &e) {
    switch (e.kind()) {
    case Kind::Number: return number_plain(e.value());
    case Kind::Parameter:
    case Kind::Variable: return e.name();
    case Kind::Sum: {
        std::string out;
        bool first = true;
        for (const Expr &t : e.args()) {
            if (first) {
                out = plain(t);
                first = false;
            } else if (negative_term(t)) {
                out += " - " + plain(negate_term(t));
            } else {
                out += " + " + plain(t);
            }
        }
        return out;
    }
    case Kind::Product: return plain_product(e);
    case Kind::Power: return plain_power(e);
    case Kind::Call: return std::string(func_name(e.func())) + "(" + plain(e.arg()) + ")";
    case Kind::Integral: {
        std::string out = "Int(" + plain(e.integrand()) + ", " + e.name();
        if (e.has_bounds()) out += ", " + plain(e.lower()) + ", " + plain(e.upper());
        return out + ")";
    }
    }
    return "?";
}

// --- latex ----------------------------------------------------------------

std::string latex(const Expr &e);

std::string latex_symbol(const std::string &n) {
    static const char *greek[] = {"alpha", "beta", "gamma", "eta", "omega", "tau", "rho", "lambda", "mu", "nu"};
    for (const char *g : greek) {
        if (n == g) return std::string("\\") + g;
    }
    return n.size() == 1 ? n : "\\mathrm{" + n + "}";
}

std::string latex_number(const Rational &v) {
    if (boost::multiprecision::denominator(v) == 1) return v.str();
    const Rational a = v < 0 ? Rational(-v) : v;
    std::string s = "\\frac{" + boost::multiprecision::numerator(a).str() + "}{" +
                    boost::multiprecision::denominator(a).str() + "}";
    return v < 0 ? "-" + s : s;
}

std::string latex_factor(const Expr &f) {
    if (f.kind() == Kind::Sum) return "\\left(" + latex(f) + "\\right)";
    return latex(f);
}

std::string latex(const Expr &e) {
    switch (e.kind()) {
    case Kind::Number: return latex_number(e.value());
    case Kind::Parameter:
    case Kind::Variable: return latex_symbol(e.name());
    case Kind::Sum: {
        std::string out;
        bool first = true;
        for (const Expr &t : e.args()) {
            if (first) {
                out = latex(t);
                first = false;
            } else if (negative_term(t)) {
                out += " - " + latex(negate_term(t));
            } else {
                out += " + " + latex(t);
            }
        }
        return out;
    }
    case Kind::Product: {
        std::string out;
        auto args = e.args();
        std::size_t i = 0;
        if (args[0].is_number()) {
            const Rational &c = args[0].value();
            out = c == -1 ? "-" : latex_number(c) + " ";
            i = 1;
        }
        for (std::size_t k = i; k < args.size(); ++k) {
            if (k > i) out += " ";
            out += latex_factor(args[k]);
        }
        return out;
    }
    case Kind::Power: {
        const Expr &b = e.base();
        std::string bs = b.is_symbol() ? latex(b) : "\\left(" + latex(b) + "\\right)";
        if (b.kind() == Kind::Call && b.func() != Func::Exp) {
            return "\\" + std::string(func_name(b.func())) + "^{" + latex(e.exponent()) + "}\\left(" +
                   latex(b.arg()) + "\\right)";
        }
        if (b.is_integer() && b.value() > 0) bs = latex(b);
        return bs + "^{" + latex(e.exponent()) + "}";
    }
    case Kind::Call:
        if (e.func() == Func::Exp) return "e^{" + latex(e.arg()) + "}";
        return "\\" + std::string(func_name(e.func())) + "\\left(" + latex(e.arg()) + "\\right)";
    case Kind::Integral: {
        std::string out = "\\int";
        if (e.has_bounds()) out += "_{" + latex(e.lower()) + "}^{" + latex(e.upper()) + "}";
        return out + " " + latex_factor(e.integrand()) + " \\, d" + latex_symbol(e.name());
    }
    }
    return "?";
}

// --- json -----------------------------------------------------------------

const char *kind_name(const Expr &e) {
    switch (e.kind()) {
    case Kind::Number: return e.is_integer() ? "integer" : "rational";
    case Kind::Parameter: return "parameter";
    case Kind::Variable: return "variable";
    case Kind::Sum: return "sum";
    case Kind::Product: return "product";
    case Kind::Power: return "power";
    case Kind::Call: return "call";
    case Kind::Integral: return "integral";
    }
    return "?";
}

}  // namespace

std::string render(const Expr &e, Format f) {
    switch (f) {
    case Format::Plain: return plain(e);
    case Format::Latex: return latex(e);
    case Format::Json: return to_json(e).dump();
    }
    return {};
}

nlohmann::json to_json(const Expr &e) {
    nlohmann::json j;
    j["kind"] = kind_name(e);
    nlohmann::json children = nlohmann::json::array();
    switch (e.kind()) {
    case Kind::Number:
        if (e.is_integer()) {
            j["value"] = e.value().str();
        } else {
            j["num"] = boost::multiprecision::numerator(e.value()).str();
            j["den"] = boost::multiprecision::denominator(e.value()).str();
        }
        break;
    case Kind::Parameter:
    case Kind::Variable: j["name"] = e.name(); break;
    case Kind::Call: j["name"] = func_name(e.func()); break;
    case Kind::Integral: j["var"] = e.name(); break;
    default: break;
    }
    for (const Expr &a : e.args()) children.push_back(to_json(a));
    j["children"] = std::move(children);
    return j;
}

Expr from_json(const nlohmann::json &j) {
    const std::string kind = j.at("kind").get<std::string>();
    std::vector<Expr> ch;
    if (j.contains("children")) {
        for (const auto &c : j.at("children")) ch.push_back(from_json(c));
    }
    auto need = [&](std::size_t n) {
        if (ch.size() != n) throw std::invalid_argument("json node '" + kind + "' has wrong arity");
    };
    if (kind == "integer") return Expr::integer(Integer(j.at("value").get<std::string>()));
    if (kind == "rational") {
        return Expr::rational(Integer(j.at("num").get<std::string>()), Integer(j.at("den").get<std::string>()));
    }
    if (kind == "parameter") return Expr::parameter(j.at("name").get<std::string>());
    if (kind == "variable") return Expr::variable(j.at("name").get<std::string>());
    if (kind == "sum") return Expr::sum(ch);
    if (kind == "product") return Expr::product(ch);
    if (kind == "power") {
        need(2);
        return Expr::power(ch[0], ch[1]);
    }
    if (kind == "call") {
        need(1);
        auto f = func_from_name(j.at("name").get<std::string>());
        if (!f) throw std::invalid_argument("unknown function in json");
        return Expr::call(*f, ch[0]);
    }
    if (kind == "integral") {
        const std::string v = j.at("var").get<std::string>();
        if (ch.size() == 3) return Expr::integral(ch[0], v, ch[1], ch[2]);
        need(1);
        return Expr::integral(ch[0], v);
    }
    throw std::invalid_argument("unknown json node kind '" + kind + "'");
}

std::string render_ode(const ODEProblem &p) {
    std::string out = "diff(" + p.dep + "," + p.indep + ") = " + render(p.rhs);
    if (p.base_point) out += ", at " + p.indep + "=" + render(*p.base_point);
    if (p.const_name != "c") out += ", const " + p.const_name;
    return out;
}

}  // namespace opode
