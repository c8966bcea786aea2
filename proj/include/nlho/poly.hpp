#pragma once

#include "nlho/mpoly.hpp"
#include "nlho/scalar.hpp"

#include <optional>

namespace nlho {

// polynomial in the flat coordinates u^1..u^n with Scalar coefficients
using Poly = MPoly<Scalar>;

inline Poly poly_constant(const Context& ctx, Scalar c) {
    return Poly::constant(static_cast<unsigned>(ctx.ncoords()), std::move(c));
}
inline Poly poly_coord(const Context& ctx, size_t i, unsigned e = 1) {
    return Poly::variable(static_cast<unsigned>(ctx.ncoords()), static_cast<unsigned>(i), e);
}

// Normalized rational function: denominator monic in the graded-lex leading
// Scalar and coprime to the numerator, so equality is syntactic. Zero is 0/1.
class Ratio {
public:
    Ratio() : num_(0), den_(PolyOne(0)) {}
    Ratio(int v) : num_(0), den_(PolyOne(0)) { num_ = Poly::constant(0, Scalar(v)); }
    Ratio(Scalar s) : num_(0), den_(PolyOne(0)) { num_ = Poly::constant(0, std::move(s)); }
    Ratio(Poly n) : num_(std::move(n)), den_(PolyOne(num_.nvars())) {}
    Ratio(Poly n, Poly d) { assign(std::move(n), std::move(d)); }

    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_polynomial() const { return den_.is_constant(); }
    bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
    unsigned nvars() const { return std::max(num_.nvars(), den_.nvars()); }

    Scalar constant_value() const {
        if (!is_constant()) throw MathError("Ratio: not a constant");
        if (num_.is_zero()) return Scalar(0);
        return num_.leading_coeff() / den_.leading_coeff();
    }
    const Poly& poly() const {
        if (!is_polynomial()) throw MathError("Ratio: not a polynomial");
        return num_; // den is the constant 1 after normalization
    }

    bool operator==(const Ratio& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Ratio& o) const { return !(*this == o); }
    bool operator==(int v) const { return *this == Ratio(v); }

    Ratio operator-() const {
        Ratio r(*this);
        r.num_ = -r.num_;
        return r;
    }
    Ratio operator+(const Ratio& o) const {
        Poly g = poly_gcd(den_, o.den_);
        Poly da = *den_.divide_exact(g), db = *o.den_.divide_exact(g);
        return Ratio(num_ * db + o.num_ * da, den_ * db);
    }
    Ratio operator-(const Ratio& o) const { return *this + (-o); }
    Ratio operator*(const Ratio& o) const {
        if (is_zero() || o.is_zero()) return Ratio();
        Poly g1 = poly_gcd(num_, o.den_), g2 = poly_gcd(o.num_, den_);
        Ratio r;
        r.num_ = *num_.divide_exact(g1) * *o.num_.divide_exact(g2);
        r.den_ = *den_.divide_exact(g2) * *o.den_.divide_exact(g1);
        r.make_monic();
        return r;
    }
    Ratio operator/(const Ratio& o) const {
        if (o.is_zero()) throw MathError("Ratio: division by zero");
        return *this * Ratio(o.den_, o.num_);
    }
    Ratio& operator+=(const Ratio& o) { *this = *this + o; return *this; }
    Ratio& operator-=(const Ratio& o) { *this = *this - o; return *this; }
    Ratio& operator*=(const Ratio& o) { *this = *this * o; return *this; }

    Ratio pow(unsigned e) const {
        Ratio r(1);
        Ratio b = *this;
        while (e) {
            if (e & 1) r = r * b;
            e >>= 1;
            if (e) b = b * b;
        }
        return r;
    }

    // exact partial derivative by the quotient rule
    Ratio derivative(unsigned v) const {
        if (is_polynomial()) return Ratio(num_.derivative(v) * den_.leading_coeff().inverse());
        Poly n = num_.derivative(v) * den_ - num_ * den_.derivative(v);
        return Ratio(std::move(n), den_ * den_);
    }

    // substitute coordinate v by images[v] everywhere
    Ratio substitute(const std::vector<Ratio>& images) const {
        return subst_poly(num_, images) / subst_poly(den_, images);
    }

    Scalar eval(const std::vector<Scalar>& vals) const {
        Scalar d = den_.eval(vals);
        if (d.is_zero()) throw MathError("Ratio: evaluation hits zero denominator");
        return num_.eval(vals) / d;
    }

private:
    static Poly PolyOne(unsigned nvars) { return Poly::constant(nvars, Scalar(1)); }

    static Ratio subst_poly(const Poly& p, const std::vector<Ratio>& images) {
        Ratio acc;
        for (auto& t : p.terms()) {
            Ratio m{Scalar(t.second)};
            for (unsigned v = 0; v < p.nvars(); ++v)
                if (t.first[v]) m = m * images[v].pow(t.first[v]);
            acc = acc + m;
        }
        return acc;
    }

    void assign(Poly n, Poly d) {
        if (d.is_zero()) throw MathError("Ratio: zero denominator");
        num_ = std::move(n);
        den_ = std::move(d);
        if (num_.is_zero()) {
            den_ = PolyOne(den_.nvars());
            return;
        }
        Poly g = poly_gcd(num_, den_);
        if (!(g.is_constant() && g.leading_coeff() == Scalar(1))) {
            num_ = *num_.divide_exact(g);
            den_ = *den_.divide_exact(g);
        }
        make_monic();
    }
    void make_monic() {
        if (den_.is_zero()) return;
        Scalar lc = den_.leading_coeff();
        if (!(lc == Scalar(1))) {
            Scalar inv = lc.inverse();
            num_ = num_ * inv;
            den_ = den_ * inv;
        }
    }

    Poly num_, den_;
};

// exact partial derivative of a polynomial in coordinate k (0-based)
inline Poly diff(const Poly& f, unsigned k) { return f.derivative(k); }
inline Ratio diff(const Ratio& f, unsigned k) { return f.derivative(k); }

// Decides whether f = kappa * q^2 over K and returns (kappa, q) with q monic
// when it does; kappa itself need not be a square in K. Uses the squarefree
// decomposition of f, so no irreducible factorization is required.
inline std::optional<std::pair<Scalar, Poly>> perfect_square(const Poly& f) {
    if (f.is_zero()) throw MathError("perfect_square: zero input");
    auto dec = squarefree_decomposition(f);
    Poly root = Poly::constant(f.nvars(), Scalar(1));
    for (auto& [g, e] : dec.factors) {
        if (e % 2) return std::nullopt;
        root = root * g.pow(e / 2);
    }
    return std::make_pair(dec.unit, root);
}

} // namespace nlho
