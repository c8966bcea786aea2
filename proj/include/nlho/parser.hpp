#pragma once

#include "nlho/context.hpp"
#include "nlho/poly.hpp"

#include <cctype>
#include <sstream>
#include <string>

namespace nlho {

// --- printing ---------------------------------------------------------------
//
// The printer emits the exact grammar accepted by parse_expr, so printing a
// normalized Ratio and re-parsing it is the identity. Scalars containing root
// symbols are only printable with allow_roots (reports), never re-parseable.

std::string print_scalar(const Scalar& s, const Context& ctx, bool allow_roots = false);
std::string print_poly(const Poly& p, const Context& ctx, bool allow_roots = false);
std::string print_ratio(const Ratio& r, const Context& ctx, bool allow_roots = false);

namespace detail {

inline std::string print_rat(const Rat& v) {
    return v.get_str();
}

// one monomial in the given variable names, "" for the empty monomial
inline std::string print_mono(const Mono& m, const std::vector<std::string>& names) {
    std::string out;
    for (unsigned v = 0; v < m.nvars(); ++v) {
        if (!m[v]) continue;
        if (!out.empty()) out += "*";
        out += names[v];
        if (m[v] > 1) out += "^" + std::to_string(m[v]);
    }
    return out;
}

// true when `-" + body` would re-parse as (-first_var)^e, which the grammar's
// unary minus would mis-associate; such bodies need an explicit "1*"
inline bool needs_one_guard(const std::string& body) {
    size_t i = 0;
    while (i < body.size() && (std::isalnum(static_cast<unsigned char>(body[i])) || body[i] == '_')) ++i;
    return i < body.size() && body[i] == '^';
}

template <class PolyT, class CoeffPrinter>
std::string print_poly_generic(const PolyT& p, const std::vector<std::string>& names,
                               CoeffPrinter coeff_str) {
    if (p.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (auto& t : p.terms()) {
        auto [cs, negative] = coeff_str(t.second);
        std::string ms = print_mono(t.first, names);
        std::string body;
        if (ms.empty()) body = cs;
        else if (cs == "1") body = ms;
        else body = cs + "*" + ms;
        if (first) {
            if (negative) {
                if (body != cs && needs_one_guard(body)) body = "1*" + body;
                out = "-" + body;
            } else {
                out = body;
            }
            first = false;
        } else {
            out += negative ? " - " : " + ";
            out += body;
        }
    }
    return out;
}

} // namespace detail

inline std::string print_pfrac(const PFrac& f, const Context& ctx) {
    std::vector<std::string> names;
    for (size_t i = 0; i < ctx.nparams(); ++i) names.push_back(ctx.param(i).name);
    auto coeff = [](const Rat& c) {
        Rat a = abs(c);
        return std::make_pair(detail::print_rat(a), sgn(c) < 0);
    };
    std::string n = detail::print_poly_generic(f.num(), names, coeff);
    if (f.den().is_constant()) return n;
    std::string d = detail::print_poly_generic(f.den(), names, coeff);
    return "(" + n + ")/(" + d + ")";
}

inline std::string print_scalar(const Scalar& s, const Context& ctx, bool allow_roots) {
    if (s.is_zero()) return "0";
    if (!s.is_root_free()) {
        if (!allow_roots) throw MathError("print: Scalar with root symbols is not expressible in the grammar");
        std::string out;
        bool first = true;
        for (auto& [mask, c] : s.root_terms()) {
            std::string piece = print_pfrac(c, ctx);
            if (piece.find(' ') != std::string::npos || piece.find('/') != std::string::npos)
                piece = "(" + piece + ")";
            for (unsigned b = 0; b < 32; ++b)
                if (mask & (1u << b)) piece += "*" + ctx.root(b).display;
            out += first ? piece : " + " + piece;
            first = false;
        }
        return out;
    }
    return print_pfrac(s.fraction(), ctx);
}

inline std::string print_poly(const Poly& p, const Context& ctx, bool allow_roots) {
    std::vector<std::string> names;
    for (size_t i = 0; i < ctx.ncoords(); ++i) names.push_back(ctx.coord_name(i));
    auto coeff = [&](const Scalar& c) -> std::pair<std::string, bool> {
        if (c.is_rational()) {
            Rat v = c.rational_value();
            return {detail::print_rat(abs(v)), sgn(v) < 0};
        }
        bool neg = c.norm_sign() < 0;
        std::string body = print_scalar(neg ? -c : c, ctx, allow_roots);
        return {"(" + body + ")", neg};
    };
    return detail::print_poly_generic(p, names, coeff);
}

inline std::string print_ratio(const Ratio& r, const Context& ctx, bool allow_roots) {
    std::string n = print_poly(r.num(), ctx, allow_roots);
    if (r.is_polynomial()) return n;
    std::string d = print_poly(r.den(), ctx, allow_roots);
    return "(" + n + ")/(" + d + ")";
}

// --- parsing ----------------------------------------------------------------
//
// expr   := term (('+'|'-') term)*
// term   := factor (('*'|'/') factor)*
// factor := base ('^' uint)?
// base   := rational | ident | '(' expr ')' | '-' base
//
// Division by zero is an error; division by a constant parameter expression
// is only accepted when the expression is provably nonzero (a monomial in
// parameters carrying the nonzero flag).
class ExprParser {
public:
    ExprParser(const std::string& text, const Context& ctx) : text_(text), ctx_(ctx) {}

    Ratio parse() {
        skip_ws();
        Ratio r = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
        return r;
    }

private:
    Ratio parse_expr() {
        Ratio r = parse_term();
        while (true) {
            skip_ws();
            if (peek() == '+') { ++pos_; r = r + parse_term(); }
            else if (peek() == '-') { ++pos_; r = r - parse_term(); }
            else return r;
        }
    }

    Ratio parse_term() {
        Ratio r = parse_factor();
        while (true) {
            skip_ws();
            if (peek() == '*') { ++pos_; r = r * parse_factor(); }
            else if (peek() == '/') {
                size_t at = pos_;
                ++pos_;
                Ratio d = parse_factor();
                if (d.is_zero()) throw ParseError("zero denominator", at);
                if (d.is_constant()) {
                    Scalar s = d.constant_value();
                    if (!s.is_rational() && !s.provably_nonzero())
                        throw ParseError("denominator not provably nonzero", at);
                }
                r = r / d;
            } else {
                return r;
            }
        }
    }

    Ratio parse_factor() {
        Ratio b = parse_base();
        skip_ws();
        if (peek() == '^') {
            ++pos_;
            skip_ws();
            size_t at = pos_;
            if (!std::isdigit(static_cast<unsigned char>(peek())))
                throw ParseError("expected nonnegative integer exponent", at);
            unsigned long e = 0;
            while (std::isdigit(static_cast<unsigned char>(peek()))) {
                e = e * 10 + static_cast<unsigned long>(peek() - '0');
                if (e > 255) throw ParseError("exponent too large", at);
                ++pos_;
            }
            return b.pow(static_cast<unsigned>(e));
        }
        return b;
    }

    Ratio parse_base() {
        skip_ws();
        char c = peek();
        if (c == '-') {
            ++pos_;
            return -parse_base();
        }
        if (c == '(') {
            size_t at = pos_;
            ++pos_;
            Ratio r = parse_expr();
            skip_ws();
            if (peek() != ')') throw ParseError("unbalanced parenthesis", at);
            ++pos_;
            return r;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            mpz_class v(0);
            while (std::isdigit(static_cast<unsigned char>(peek()))) {
                v = v * 10 + (peek() - '0');
                ++pos_;
            }
            return Ratio(Scalar(Rat(v)));
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t at = pos_;
            std::string name;
            while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') {
                name += peek();
                ++pos_;
            }
            const Context::Sym* sym = ctx_.lookup(name);
            if (!sym) throw ParseError("undeclared identifier '" + name + "'", at);
            if (sym->is_coord) return Ratio(poly_coord(ctx_, sym->index));
            return Ratio(Scalar::param(&ctx_, sym->index));
        }
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    const std::string& text_;
    const Context& ctx_;
    size_t pos_ = 0;
};

inline Ratio parse_expr(const std::string& text, const Context& ctx) {
    return ExprParser(text, ctx).parse();
}

} // namespace nlho
