#pragma once

#include "nlho/context.hpp"
#include "nlho/error.hpp"
#include "nlho/mpoly.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace nlho {

using PPoly = MPoly<Rat>; // polynomial in the formal parameters

// splits |n| = s * q^2 with s squarefree (trial division, then one exact
// square-root pass for the cofactor); sign stays on s
inline void squarefree_split(const mpz_class& n, mpz_class& s, mpz_class& q) {
    s = n < 0 ? -1 : 1;
    q = 1;
    mpz_class m = abs(n);
    if (m == 0) { s = 0; return; }
    for (mpz_class p = 2; p * p <= m && p < 100000; p += (p == 2 ? 1 : 2)) {
        unsigned e = 0;
        while (mpz_divisible_p(m.get_mpz_t(), p.get_mpz_t())) {
            m /= p;
            ++e;
        }
        for (unsigned k = 0; k + 1 < e; k += 2) q *= p;
        if (e & 1) s *= p;
    }
    if (mpz_perfect_square_p(m.get_mpz_t())) {
        mpz_class r;
        mpz_sqrt(r.get_mpz_t(), m.get_mpz_t());
        q *= r;
    } else {
        s *= m;
    }
}

// Normalized fraction of parameter polynomials: denominator monic (leading
// rational 1) and coprime to the numerator. The zero element is 0/1.
class PFrac {
public:
    PFrac() : num_(0), den_(0) { den_ = PPoly::constant(0, Rat(1)); }
    PFrac(long v) : PFrac() { num_ = PPoly::constant(0, Rat(v)); }
    PFrac(const Rat& v) : PFrac() { num_ = PPoly::constant(0, v); }
    PFrac(PPoly n, PPoly d) { assign(std::move(n), std::move(d)); }
    explicit PFrac(PPoly n) : num_(std::move(n)), den_(PPoly::constant(num_.nvars(), Rat(1))) {}

    const PPoly& num() const { return num_; }
    const PPoly& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_one() const { return num_ == den_; }
    bool is_rational() const { return num_.is_constant() && den_.is_constant(); }
    unsigned nvars() const { return std::max(num_.nvars(), den_.nvars()); }

    Rat rational_value() const {
        if (!is_rational()) throw MathError("PFrac: not a rational constant");
        if (num_.is_zero()) return Rat(0);
        return num_.leading_coeff() / den_.leading_coeff();
    }

    PFrac promote(unsigned nvars) const {
        if (num_.nvars() == nvars) return *this;
        PFrac r;
        r.num_ = promote_poly(num_, nvars);
        r.den_ = promote_poly(den_, nvars);
        return r;
    }

    PFrac operator-() const {
        PFrac r(*this);
        r.num_ = -r.num_;
        return r;
    }
    PFrac operator+(const PFrac& o) const {
        auto [a, b] = align(*this, o);
        PPoly g = poly_gcd(a.den_, b.den_);
        PPoly da = *a.den_.divide_exact(g), db = *b.den_.divide_exact(g);
        return PFrac(a.num_ * db + b.num_ * da, a.den_ * db);
    }
    PFrac operator-(const PFrac& o) const { return *this + (-o); }
    PFrac operator*(const PFrac& o) const {
        auto [a, b] = align(*this, o);
        if (a.is_zero() || b.is_zero()) return PFrac();
        PPoly g1 = poly_gcd(a.num_, b.den_), g2 = poly_gcd(b.num_, a.den_);
        PFrac r;
        r.num_ = *a.num_.divide_exact(g1) * *b.num_.divide_exact(g2);
        r.den_ = *a.den_.divide_exact(g2) * *b.den_.divide_exact(g1);
        r.make_monic();
        return r;
    }
    PFrac operator/(const PFrac& o) const {
        if (o.is_zero()) throw MathError("PFrac: division by zero");
        auto [a, b] = align(*this, o);
        return a * PFrac(b.den_, b.num_);
    }
    bool operator==(const PFrac& o) const {
        auto [a, b] = align(*this, o);
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    bool operator!=(const PFrac& o) const { return !(*this == o); }

    // sign of the leading rational coefficient of the numerator
    int sign() const {
        if (num_.is_zero()) return 0;
        return sgn(num_.leading_coeff());
    }

private:
    void assign(PPoly n, PPoly d) {
        if (d.is_zero()) throw MathError("PFrac: zero denominator");
        num_ = std::move(n);
        den_ = std::move(d);
        if (num_.is_zero()) {
            den_ = PPoly::constant(den_.nvars(), Rat(1));
            return;
        }
        PPoly g = poly_gcd(num_, den_);
        if (!g.is_constant() || !(g.leading_coeff() == Rat(1))) {
            num_ = *num_.divide_exact(g);
            den_ = *den_.divide_exact(g);
        }
        make_monic();
    }
    void make_monic() {
        if (den_.is_zero()) return;
        Rat lc = den_.leading_coeff();
        if (!(lc == Rat(1))) {
            den_ = den_ / lc;
            num_ = num_ / lc;
        }
    }
    static PPoly promote_poly(const PPoly& p, unsigned nvars) {
        PPoly r(nvars);
        for (auto& t : p.terms()) r.set_term(promote_mono(t.first, nvars), t.second);
        return r;
    }
    static Mono promote_mono(const Mono& m, unsigned nvars) {
        Mono r(nvars);
        for (unsigned v = 0; v < m.nvars(); ++v)
            if (m[v]) r.set(v, m[v]);
        return r;
    }
    static std::pair<PFrac, PFrac> align(const PFrac& a, const PFrac& b) {
        unsigned n = std::max(a.nvars(), b.nvars());
        return {a.promote(n), b.promote(n)};
    }

    PPoly num_, den_;
};

// Element of the coefficient field K: a linear combination of products of
// declared square roots with PFrac coefficients. Root products are encoded
// as bitmasks over the context registry; no mask ever repeats a root, and
// radicands are squarefree and pairwise multiplicatively independent, which
// makes the representation canonical and equality syntactic.
class Scalar {
public:
    Scalar() = default;
    Scalar(int v) { init_rat(Rat(v)); }
    Scalar(long v) { init_rat(Rat(v)); }
    Scalar(const Rat& v) { init_rat(v); }
    Scalar(PFrac f, const Context* ctx = nullptr) : ctx_(ctx) {
        if (!f.is_zero()) terms_.emplace_back(0u, std::move(f));
    }

    static Scalar param(const Context* ctx, size_t i) {
        Scalar s;
        s.ctx_ = ctx;
        PPoly p = PPoly::variable(static_cast<unsigned>(ctx->nparams()), static_cast<unsigned>(i));
        s.terms_.emplace_back(0u, PFrac(std::move(p)));
        return s;
    }

    // square root of (rational * monomial in parameters); reduces against the
    // registry so radicands stay squarefree and independent
    static Scalar sqrt_of(const Context* ctx, const Rat& r, const Mono& pmono);

    const Context* ctx() const { return ctx_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_rational() const {
        return terms_.empty() || (terms_.size() == 1 && terms_[0].first == 0 && terms_[0].second.is_rational());
    }
    bool is_root_free() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].first == 0); }

    Rat rational_value() const {
        if (terms_.empty()) return Rat(0);
        if (!is_rational()) throw MathError("Scalar: not a rational constant");
        return terms_[0].second.rational_value();
    }
    const PFrac& fraction() const {
        static const PFrac zero{};
        if (terms_.empty()) return zero;
        if (!is_root_free()) throw MathError("Scalar: contains root symbols");
        return terms_[0].second;
    }

    bool operator==(const Scalar& o) const {
        if (terms_.size() != o.terms_.size()) return false;
        for (size_t i = 0; i < terms_.size(); ++i)
            if (terms_[i].first != o.terms_[i].first || terms_[i].second != o.terms_[i].second)
                return false;
        return true;
    }
    bool operator!=(const Scalar& o) const { return !(*this == o); }

    Scalar operator-() const {
        Scalar r(*this);
        for (auto& t : r.terms_) t.second = -t.second;
        return r;
    }

    Scalar operator+(const Scalar& o) const {
        Scalar r;
        r.ctx_ = merge_ctx(o);
        auto a = terms_.begin(), b = o.terms_.begin();
        while (a != terms_.end() || b != o.terms_.end()) {
            if (b == o.terms_.end() || (a != terms_.end() && a->first < b->first)) r.terms_.push_back(*a++);
            else if (a == terms_.end() || b->first < a->first) r.terms_.push_back(*b++);
            else {
                PFrac s = a->second + b->second;
                if (!s.is_zero()) r.terms_.emplace_back(a->first, std::move(s));
                ++a; ++b;
            }
        }
        return r;
    }
    Scalar operator-(const Scalar& o) const { return *this + (-o); }

    Scalar operator*(const Scalar& o) const {
        Scalar r;
        r.ctx_ = merge_ctx(o);
        for (auto& a : terms_)
            for (auto& b : o.terms_) {
                uint32_t common = a.first & b.first;
                PFrac c = a.second * b.second;
                if (common) c = c * radicand_product(r.ctx_, common);
                r.add_term(a.first ^ b.first, std::move(c));
            }
        return r;
    }

    Scalar inverse() const {
        if (terms_.empty()) throw MathError("Scalar: division by zero");
        if (terms_.size() == 1) {
            Scalar r;
            r.ctx_ = ctx_;
            PFrac c = terms_[0].second;
            uint32_t mask = terms_[0].first;
            if (mask) c = c * radicand_product(ctx_, mask);
            r.terms_.emplace_back(mask, PFrac(1) / c);
            return r;
        }
        // conjugate away the highest root symbol present
        uint32_t all = 0;
        for (auto& t : terms_) all |= t.first;
        uint32_t bit = 1u << (31 - __builtin_clz(all));
        Scalar a, t;
        a.ctx_ = t.ctx_ = ctx_;
        for (auto& term : terms_) {
            if (term.first & bit) t.terms_.emplace_back(term.first, term.second);
            else a.terms_.emplace_back(term.first, term.second);
        }
        Scalar conj = a - t;
        Scalar norm = *this * conj; // = a^2 - t^2, free of `bit`
        return conj * norm.inverse();
    }

    Scalar operator/(const Scalar& o) const { return *this * o.inverse(); }

    bool operator==(int v) const { return *this == Scalar(v); }

    // substitute parameter i by the given fraction everywhere; roots whose
    // radicand involves a substituted parameter are rejected
    Scalar substitute_param(size_t i, const PFrac& value) const;

    Rat eval_params(const std::vector<Rat>& vals) const; // roots rejected

    // deterministic sign for normalization conventions: sign of the
    // root-free term if present, else of the first root term
    int norm_sign() const {
        if (terms_.empty()) return 0;
        return terms_[0].second.sign();
    }

    const std::vector<std::pair<uint32_t, PFrac>>& root_terms() const { return terms_; }

    // a Scalar is provably nonzero when it is a single root-free term whose
    // numerator is one monomial in parameters all flagged nonzero
    bool provably_nonzero() const {
        if (terms_.size() != 1 || terms_[0].first != 0) return false;
        const PPoly& n = terms_[0].second.num();
        const PPoly& d = terms_[0].second.den();
        auto mono_ok = [&](const PPoly& p) {
            if (p.term_count() != 1) return false;
            const Mono& m = p.leading_mono();
            for (unsigned v = 0; v < m.nvars(); ++v)
                if (m[v] > 0 && (!ctx_ || !ctx_->param(v).nonzero)) return false;
            return true;
        };
        return mono_ok(n) && mono_ok(d);
    }

private:
    void init_rat(const Rat& v) {
        if (!(v == 0)) terms_.emplace_back(0u, PFrac(v));
    }
    const Context* merge_ctx(const Scalar& o) const {
        if (ctx_ && o.ctx_ && ctx_ != o.ctx_) throw Error("Scalar: mixed contexts");
        return ctx_ ? ctx_ : o.ctx_;
    }
    void add_term(uint32_t mask, PFrac c) {
        if (c.is_zero()) return;
        auto it = std::lower_bound(terms_.begin(), terms_.end(), mask,
                                   [](const auto& t, uint32_t m) { return t.first < m; });
        if (it != terms_.end() && it->first == mask) {
            it->second = it->second + c;
            if (it->second.is_zero()) terms_.erase(it);
        } else {
            terms_.emplace(it, mask, std::move(c));
        }
    }
    static PFrac radicand_product(const Context* ctx, uint32_t mask) {
        if (!ctx) throw Error("Scalar: root product without context");
        PFrac p(1);
        for (unsigned i = 0; i < 32; ++i)
            if (mask & (1u << i)) {
                const RootSym& r = ctx->root(i);
                PPoly m(static_cast<unsigned>(ctx->nparams()));
                m.set_term(r.param_mono, r.rational);
                p = p * PFrac(std::move(m));
            }
        return p;
    }

    const Context* ctx_ = nullptr;
    std::vector<std::pair<uint32_t, PFrac>> terms_; // sorted by mask
};

inline Scalar Scalar::sqrt_of(const Context* ctx, const Rat& r, const Mono& pmono) {
    if (r == 0) return Scalar(0);
    // sqrt(a/b) = sqrt(a*b)/b with a*b = s*q^2, s squarefree
    mpz_class s_int, q;
    squarefree_split(mpz_class(r.get_num() * r.get_den()), s_int, q);
    Rat outer(q, r.get_den());
    outer.canonicalize();
    Mono red(pmono.nvars());
    Mono half(pmono.nvars());
    for (unsigned v = 0; v < pmono.nvars(); ++v) {
        red.set(v, pmono[v] % 2);
        half.set(v, pmono[v] / 2);
    }
    PPoly mult(static_cast<unsigned>(ctx->nparams()));
    mult.set_term(half, outer);
    Scalar coeff(PFrac(std::move(mult)), ctx);

    if (s_int == 1 && red.deg() == 0) return coeff;

    // search the registry (incl. subset products) for a representation
    size_t n = ctx->nroots();
    if (n > 16) throw Error("Scalar: too many root symbols");
    for (uint32_t sub = 0; sub < (1u << n); ++sub) {
        Rat prod_r(s_int);
        Mono prod_m = red;
        bool overflow = false;
        for (unsigned i = 0; i < n; ++i)
            if (sub & (1u << i)) {
                prod_r *= ctx->root(i).rational;
                for (unsigned v = 0; v < prod_m.nvars(); ++v) {
                    unsigned e = prod_m[v] + ctx->root(i).param_mono[v];
                    if (e > 255) { overflow = true; break; }
                    prod_m.set(v, e);
                }
                if (overflow) break;
            }
        if (overflow) continue;
        bool even = true;
        for (unsigned v = 0; v < prod_m.nvars(); ++v)
            if (prod_m[v] % 2) { even = false; break; }
        if (!even) continue;
        if (prod_r < 0 || !mpz_perfect_square_p(mpz_class(prod_r.get_num()).get_mpz_t()) ||
            !mpz_perfect_square_p(mpz_class(prod_r.get_den()).get_mpz_t()))
            continue;
        // radicand * prod(subset radicands) is a perfect square: reuse subset
        mpz_class rn, rd;
        mpz_sqrt(rn.get_mpz_t(), mpz_class(prod_r.get_num()).get_mpz_t());
        mpz_sqrt(rd.get_mpz_t(), mpz_class(prod_r.get_den()).get_mpz_t());
        Mono hm(prod_m.nvars());
        for (unsigned v = 0; v < prod_m.nvars(); ++v) hm.set(v, prod_m[v] / 2);
        Rat rsq(rn, rd);
        rsq.canonicalize();
        PPoly sq(static_cast<unsigned>(ctx->nparams()));
        sq.set_term(hm, rsq);
        PFrac c = PFrac(std::move(sq)) / radicand_product(ctx, sub);
        Scalar root;
        root.ctx_ = ctx;
        root.terms_.emplace_back(sub, std::move(c));
        return coeff * root;
    }

    std::string disp = "sqrt(" + Rat(s_int).get_str();
    for (unsigned v = 0; v < red.nvars(); ++v)
        for (unsigned e = 0; e < red[v]; ++e) disp += "*" + ctx->param(v).name;
    disp += ")";
    if (ctx->nroots() >= 16) throw Error("Scalar: too many root symbols");
    size_t idx = ctx->add_root(RootSym{Rat(s_int), red, disp});
    Scalar root;
    root.ctx_ = ctx;
    root.terms_.emplace_back(1u << idx, PFrac(1));
    return coeff * root;
}

inline Scalar Scalar::substitute_param(size_t i, const PFrac& value) const {
    Scalar r;
    r.ctx_ = ctx_;
    unsigned np = ctx_ ? static_cast<unsigned>(ctx_->nparams()) : 0;
    PFrac val = value.promote(np);
    for (auto& [mask, c] : terms_) {
        if (mask) {
            for (unsigned b = 0; b < 32; ++b)
                if ((mask & (1u << b)) && ctx_->root(b).param_mono[i] > 0)
                    throw MathError("Scalar: cannot substitute parameter under a root");
        }
        auto subst_poly = [&](const PPoly& p) {
            PFrac acc(0);
            for (auto& t : p.terms()) {
                PFrac m(t.second);
                for (unsigned v = 0; v < np; ++v) {
                    if (!t.first[v]) continue;
                    if (v == i) {
                        for (unsigned e = 0; e < t.first[v]; ++e) m = m * val;
                    } else {
                        PPoly pv = PPoly::variable(np, v, t.first[v]);
                        m = m * PFrac(std::move(pv));
                    }
                }
                acc = acc + m;
            }
            return acc;
        };
        PFrac nn = subst_poly(c.num()), dd = subst_poly(c.den());
        r.add_term(mask, nn / dd);
    }
    return r;
}

inline Rat Scalar::eval_params(const std::vector<Rat>& vals) const {
    Rat acc(0);
    for (auto& [mask, c] : terms_) {
        if (mask) throw MathError("Scalar: cannot evaluate root symbols");
        Rat n = c.num().eval(vals), d = c.den().eval(vals);
        if (d == 0) throw MathError("Scalar: parameter evaluation hits zero denominator");
        acc += n / d;
    }
    return acc;
}

} // namespace nlho
