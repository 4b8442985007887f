#include "opode/parse.hpp"

#include <cctype>
#include <vector>

#include "opode/calculus.hpp"

namespace opode {

ParseError::ParseError(std::size_t offset, std::string expected, std::string found)
    : std::runtime_error("parse error at offset " + std::to_string(offset) + ": expected " + expected +
                         ", found " + found),
      offset_(offset),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

const ParseContext &default_context() {
    static const ParseContext ctx;
    return ctx;
}

namespace {

constexpr int kMaxDepth = 256;

enum class Tok { Number, Name, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, Equals, Semi, End };

struct Token {
    Tok kind;
    std::size_t offset;
    std::string text;
};

std::string describe(const Token &t) {
    if (t.kind == Tok::End) return "end of input";
    return "'" + t.text + "'";
}

std::vector<Token> lex(const std::string &s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const unsigned char ch = static_cast<unsigned char>(s[i]);
        if (std::isspace(ch)) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (std::isdigit(ch) || (ch == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            if (i < s.size() && s[i] == '.') {
                ++i;
                while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            }
            out.push_back({Tok::Number, start, s.substr(start, i - start)});
            continue;
        }
        if (std::isalpha(ch) || ch == '_') {
            while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
            out.push_back({Tok::Name, start, s.substr(start, i - start)});
            continue;
        }
        Tok k;
        switch (ch) {
        case '+': k = Tok::Plus; break;
        case '-': k = Tok::Minus; break;
        case '*': k = Tok::Star; break;
        case '/': k = Tok::Slash; break;
        case '^': k = Tok::Caret; break;
        case '(': k = Tok::LParen; break;
        case ')': k = Tok::RParen; break;
        case ',': k = Tok::Comma; break;
        case '=': k = Tok::Equals; break;
        case ';': k = Tok::Semi; break;
        default: {
            std::string shown = std::isprint(ch) ? std::string(1, static_cast<char>(ch)) : "byte " + std::to_string(ch);
            throw ParseError(start, "token", "'" + shown + "'");
        }
        }
        out.push_back({k, start, std::string(1, static_cast<char>(ch))});
        ++i;
    }
    out.push_back({Tok::End, s.size(), ""});
    return out;
}

// Leading zeros would make cpp_int read the digits as octal.
Integer decimal_integer(std::string digits) {
    const auto nz = digits.find_first_not_of('0');
    digits = nz == std::string::npos ? "0" : digits.substr(nz);
    return Integer(digits);
}

Expr decimal_literal(const std::string &text) {
    const auto dot = text.find('.');
    if (dot == std::string::npos) return Expr::integer(decimal_integer(text));
    const std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    Integer den = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(text.size() - dot - 1));
    return Expr::rational(decimal_integer(digits), den);
}

class Parser {
public:
    Parser(const std::string &text, const ParseContext &ctx) : toks_(lex(text)), ctx_(ctx) {}

    Expr parse_single() {
        Expr e = expr();
        expect(Tok::End, "end of input");
        return e;
    }

    ODEProblem parse_problem() {
        ODEProblem p;
        while (peek().kind == Tok::Name && peek(1).kind == Tok::Equals) {
            const std::string name = next().text;
            next();
            Expr value = expr();
            expect(Tok::Semi, "';'");
            defs_[name] = value;
            p.definitions[name] = value;
        }
        const Token &head = peek();
        if (head.kind != Tok::Name || head.text != "diff") throw ParseError(head.offset, "'diff'", describe(head));
        next();
        expect(Tok::LParen, "'('");
        p.dep = expect(Tok::Name, "dependent variable name").text;
        expect(Tok::Comma, "','");
        p.indep = expect(Tok::Name, "independent variable name").text;
        expect(Tok::RParen, "')'");
        if (p.dep == p.indep) throw SemanticError("dependent and independent variable coincide");
        expect(Tok::Equals, "'='");
        forbid_dep_ = p.dep;
        p.rhs = expr();
        forbid_dep_.clear();
        while (peek().kind == Tok::Comma) {
            next();
            const Token &kw = expect(Tok::Name, "'at' or 'const'");
            if (kw.text == "at") {
                const Token &v = expect(Tok::Name, "variable name");
                if (v.text != p.indep) throw ParseError(v.offset, "'" + p.indep + "'", describe(v));
                expect(Tok::Equals, "'='");
                const std::size_t at = peek().offset;
                Expr bp = expr();
                if (!free_names(bp).empty()) {
                    throw SemanticError("base point at offset " + std::to_string(at) + " must be a literal");
                }
                p.base_point = bp;
            } else if (kw.text == "const") {
                p.const_name = expect(Tok::Name, "constant name").text;
            } else {
                throw ParseError(kw.offset, "'at' or 'const'", describe(kw));
            }
        }
        expect(Tok::End, "end of input");
        if (p.rhs.has_integral() && depends_on(p.rhs, p.dep)) {
            throw SemanticError("right-hand side contains an integral of the dependent variable");
        }
        return p;
    }

private:
    const Token &peek(std::size_t ahead = 0) const {
        const std::size_t k = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[k];
    }
    const Token &next() {
        const Token &t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }
    const Token &expect(Tok k, const std::string &what) {
        const Token &t = peek();
        if (t.kind != k) throw ParseError(t.offset, what, describe(t));
        return next();
    }

    struct DepthGuard {
        Parser &p;
        explicit DepthGuard(Parser &pp) : p(pp) {
            if (++p.depth_ > kMaxDepth) throw ParseError(p.peek().offset, "shallower nesting", "nesting too deep");
        }
        ~DepthGuard() { --p.depth_; }
    };

    Expr expr() {
        DepthGuard g(*this);
        std::vector<Expr> terms{term()};
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            const bool minus = next().kind == Tok::Minus;
            Expr t = term();
            terms.push_back(minus ? -t : t);
        }
        return Expr::sum(std::move(terms));
    }

    Expr term() {
        Expr acc = unary();
        while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
            const Token &op = next();
            Expr rhs = unary();
            acc = op.kind == Tok::Star ? acc * rhs : acc / rhs;
        }
        return acc;
    }

    Expr unary() {
        DepthGuard g(*this);
        if (peek().kind == Tok::Minus) {
            next();
            return -unary();
        }
        return power();
    }

    Expr power() {
        Expr base = atom();
        if (peek().kind == Tok::Caret) {
            next();
            return pow(base, unary());
        }
        return base;
    }

    Expr atom() {
        DepthGuard g(*this);
        const Token &t = peek();
        switch (t.kind) {
        case Tok::Number: next(); return decimal_literal(t.text);
        case Tok::LParen: {
            next();
            Expr e = expr();
            expect(Tok::RParen, "')'");
            return e;
        }
        case Tok::Name: {
            const Token name = next();
            if (peek().kind == Tok::LParen) return call(name);
            return identifier(name.text);
        }
        default: throw ParseError(t.offset, "expression", describe(t));
        }
    }

    Expr identifier(const std::string &name) {
        if (auto it = defs_.find(name); it != defs_.end()) return it->second;
        if (auto it = ctx_.definitions.find(name); it != ctx_.definitions.end()) return it->second;
        if (ctx_.variables.count(name) || name == forbid_dep_) return Expr::variable(name);
        return Expr::parameter(name);
    }

    Expr call(const Token &name) {
        expect(Tok::LParen, "'('");
        if (name.text == "diff") {
            const std::size_t at = peek().offset;
            Expr body = expr();
            expect(Tok::Comma, "','");
            const std::string v = expect(Tok::Name, "variable name").text;
            expect(Tok::RParen, "')'");
            if (!forbid_dep_.empty() && depends_on(body, forbid_dep_)) {
                throw SemanticError("right-hand side differentiates the dependent variable (offset " +
                                    std::to_string(at) + ")");
            }
            try {
                return diff(body, v);
            } catch (const UnsupportedError &e) {
                throw SemanticError(e.what());
            }
        }
        if (name.text == "Int") {
            Expr body = expr();
            expect(Tok::Comma, "','");
            const std::string v = expect(Tok::Name, "variable name").text;
            body = substitute(body, v, Expr::variable(v));
            if (!forbid_dep_.empty() && depends_on(body, forbid_dep_)) {
                throw SemanticError("right-hand side integrates the dependent variable");
            }
            if (peek().kind == Tok::Comma) {
                next();
                Expr lo = expr();
                expect(Tok::Comma, "','");
                Expr hi = expr();
                expect(Tok::RParen, "')'");
                return Expr::integral(body, v, lo, hi);
            }
            expect(Tok::RParen, "')'");
            return Expr::integral(body, v);
        }
        auto f = func_from_name(name.text);
        if (!f) throw ParseError(name.offset, "function name", "'" + name.text + "'");
        Expr arg = expr();
        expect(Tok::RParen, "')'");
        return Expr::call(*f, arg);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int depth_ = 0;
    const ParseContext &ctx_;
    std::map<std::string, Expr> defs_;
    std::string forbid_dep_;
};

}  // namespace

Expr parse_expr(const std::string &text, const ParseContext &ctx) { return Parser(text, ctx).parse_single(); }

ODEProblem parse_ode(const std::string &text, const ParseContext &ctx) { return Parser(text, ctx).parse_problem(); }

ODEProblem make_problem(const Expr &rhs, std::optional<Expr> base_point) {
    ODEProblem p;
    p.rhs = rhs;
    p.base_point = std::move(base_point);
    return p;
}

}  // namespace opode
