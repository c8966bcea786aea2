#pragma once

#include "nlho/mono.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace nlho {

// Sparse multivariate polynomial over a coefficient field C.
// Terms are kept sorted in descending graded-lex order with no zero
// coefficients, so equality is plain term-by-term comparison.
//
// C must be a field type constructible from int with +,-,*,/ and ==.
template <class C>
class MPoly {
public:
    using Term = std::pair<Mono, C>;

    MPoly() : nvars_(0) {}
    explicit MPoly(unsigned nvars) : nvars_(nvars) {}

    static MPoly constant(unsigned nvars, C c) {
        MPoly r(nvars);
        if (!(c == C(0))) r.terms_.emplace_back(Mono(nvars), std::move(c));
        return r;
    }
    static MPoly variable(unsigned nvars, unsigned v, unsigned e = 1) {
        MPoly r(nvars);
        Mono m(nvars);
        m.set(v, e);
        r.terms_.emplace_back(m, C(1));
        return r;
    }

    unsigned nvars() const { return nvars_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const { return terms_.empty() || terms_.front().first.is_one(); }
    size_t term_count() const { return terms_.size(); }
    const std::vector<Term>& terms() const { return terms_; }

    unsigned total_degree() const { return terms_.empty() ? 0 : terms_.front().first.deg(); }

    unsigned degree_in(unsigned v) const {
        unsigned d = 0;
        for (auto& t : terms_) d = std::max(d, t.first[v]);
        return d;
    }

    bool involves(unsigned v) const {
        for (auto& t : terms_)
            if (t.first[v] > 0) return true;
        return false;
    }

    const C& leading_coeff() const { return terms_.front().second; }
    const Mono& leading_mono() const { return terms_.front().first; }

    // the constant term
    C constant_term() const {
        if (terms_.empty()) return C(0);
        if (terms_.back().first.is_one()) return terms_.back().second;
        return C(0);
    }

    // zero-variable constants promote into any ring
    MPoly promoted(unsigned nv) const {
        if (nvars_ == nv) return *this;
        if (!is_constant()) throw std::invalid_argument("MPoly: mixed variable counts");
        MPoly r(nv);
        if (!terms_.empty()) r.terms_.emplace_back(Mono(nv), terms_.front().second);
        return r;
    }

    bool operator==(const MPoly& o) const {
        if (nvars_ != o.nvars_) {
            unsigned nv = std::max(nvars_, o.nvars_);
            return promoted(nv).terms_ == o.promoted(nv).terms_;
        }
        return terms_ == o.terms_;
    }
    bool operator!=(const MPoly& o) const { return !(*this == o); }

    MPoly operator-() const {
        MPoly r(*this);
        for (auto& t : r.terms_) t.second = -t.second;
        return r;
    }

    MPoly operator+(const MPoly& o) const {
        if (nvars_ != o.nvars_) {
            unsigned nv = std::max(nvars_, o.nvars_);
            return promoted(nv) + o.promoted(nv);
        }
        MPoly r(nvars_);
        r.terms_.reserve(terms_.size() + o.terms_.size());
        auto a = terms_.begin(), b = o.terms_.begin();
        while (a != terms_.end() && b != o.terms_.end()) {
            int c = a->first.cmp(b->first);
            if (c > 0) r.terms_.push_back(*a++);
            else if (c < 0) r.terms_.push_back(*b++);
            else {
                C s = a->second + b->second;
                if (!(s == C(0))) r.terms_.emplace_back(a->first, std::move(s));
                ++a; ++b;
            }
        }
        r.terms_.insert(r.terms_.end(), a, terms_.end());
        r.terms_.insert(r.terms_.end(), b, o.terms_.end());
        return r;
    }

    MPoly operator-(const MPoly& o) const { return *this + (-o); }

    MPoly operator*(const MPoly& o) const {
        if (nvars_ != o.nvars_) {
            unsigned nv = std::max(nvars_, o.nvars_);
            return promoted(nv) * o.promoted(nv);
        }
        MPoly r(nvars_);
        if (is_zero() || o.is_zero()) return r;
        std::map<Mono, C, std::greater<Mono>> acc;
        for (auto& a : terms_)
            for (auto& b : o.terms_) {
                Mono m = a.first * b.first;
                C p = a.second * b.second;
                auto it = acc.find(m);
                if (it == acc.end()) acc.emplace(m, std::move(p));
                else it->second = it->second + p;
            }
        for (auto& kv : acc)
            if (!(kv.second == C(0))) r.terms_.emplace_back(kv.first, std::move(kv.second));
        return r;
    }

    MPoly operator*(const C& c) const {
        MPoly r(nvars_);
        if (c == C(0)) return r;
        r.terms_ = terms_;
        for (auto& t : r.terms_) t.second = t.second * c;
        return r;
    }

    MPoly operator/(const C& c) const {
        MPoly r(nvars_);
        r.terms_ = terms_;
        for (auto& t : r.terms_) t.second = t.second / c;
        return r;
    }

    MPoly& operator+=(const MPoly& o) { *this = *this + o; return *this; }
    MPoly& operator-=(const MPoly& o) { *this = *this - o; return *this; }
    MPoly& operator*=(const MPoly& o) { *this = *this * o; return *this; }

    MPoly pow(unsigned e) const {
        MPoly r = constant(nvars_, C(1));
        MPoly base = *this;
        while (e) {
            if (e & 1) r = r * base;
            base = (e >>= 1) ? base * base : base;
        }
        return r;
    }

    MPoly derivative(unsigned v) const {
        MPoly r(nvars_);
        for (auto& t : terms_) {
            unsigned e = t.first[v];
            if (e == 0) continue;
            Mono m = t.first;
            m.set(v, e - 1);
            r.terms_.emplace_back(m, t.second * C(static_cast<int>(e)));
        }
        std::sort(r.terms_.begin(), r.terms_.end(),
                  [](const Term& x, const Term& y) { return x.first > y.first; });
        return r;
    }

    // substitute every variable by the given polynomial (same ring)
    MPoly substitute(const std::vector<MPoly>& images) const {
        MPoly r(nvars_);
        for (auto& t : terms_) {
            MPoly m = constant(nvars_, t.second);
            for (unsigned v = 0; v < nvars_; ++v)
                if (t.first[v]) m = m * images[v].pow(t.first[v]);
            r = r + m;
        }
        return r;
    }

    C eval(const std::vector<C>& vals) const {
        C acc(0);
        for (auto& t : terms_) {
            C m = t.second;
            for (unsigned v = 0; v < nvars_; ++v)
                for (unsigned e = 0; e < t.first[v]; ++e) m = m * vals[v];
            acc = acc + m;
        }
        return acc;
    }

    void set_term(const Mono& m, C c) { // used by builders; keeps invariant
        auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                                   [](const Term& t, const Mono& k) { return t.first > k; });
        if (it != terms_.end() && it->first == m) {
            if (c == C(0)) terms_.erase(it);
            else it->second = std::move(c);
        } else if (!(c == C(0))) {
            terms_.emplace(it, m, std::move(c));
        }
    }

    C coeff(const Mono& m) const {
        auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                                   [](const Term& t, const Mono& k) { return t.first > k; });
        if (it != terms_.end() && it->first == m) return it->second;
        return C(0);
    }

    // exact division; nullopt when not divisible
    std::optional<MPoly> divide_exact(const MPoly& d) const {
        if (nvars_ != d.nvars()) {
            unsigned nv = std::max(nvars_, d.nvars());
            return promoted(nv).divide_exact(d.promoted(nv));
        }
        if (d.is_zero()) throw std::domain_error("MPoly: division by zero");
        MPoly q(nvars_), r(*this);
        while (!r.is_zero()) {
            Mono m;
            if (!r.leading_mono().divide(d.leading_mono(), m)) return std::nullopt;
            C c = r.leading_coeff() / d.leading_coeff();
            MPoly t(nvars_);
            t.terms_.emplace_back(m, c);
            q = q + t;
            r = r - t * d;
        }
        return q;
    }

    // view as univariate in v: coefficient polynomials indexed by degree
    std::vector<MPoly> univar_coeffs(unsigned v) const {
        std::vector<MPoly> cs(degree_in(v) + 1, MPoly(nvars_));
        for (auto& t : terms_) {
            Mono m = t.first;
            unsigned e = m[v];
            m.set(v, 0);
            cs[e].set_term(m, t.second);
        }
        return cs;
    }

    static MPoly from_univar(const std::vector<MPoly>& cs, unsigned v, unsigned nvars) {
        MPoly r(nvars);
        for (unsigned e = 0; e < cs.size(); ++e) {
            if (cs[e].is_zero()) continue;
            r = r + cs[e] * variable(nvars, v, e);
        }
        return r;
    }

private:
    std::vector<Term> terms_;
    unsigned nvars_;
};

// --- gcd and squarefree machinery ------------------------------------------

// highest variable index occurring in f, or -1 for constants
template <class C>
int top_variable(const MPoly<C>& f) {
    for (int v = static_cast<int>(f.nvars()) - 1; v >= 0; --v)
        if (f.involves(static_cast<unsigned>(v))) return v;
    return -1;
}

template <class C>
MPoly<C> monic_normalize(const MPoly<C>& f) {
    if (f.is_zero()) return f;
    return f / f.leading_coeff();
}

template <class C>
MPoly<C> poly_gcd(const MPoly<C>& a, const MPoly<C>& b);

// gcd of the univariate-view coefficients of f with respect to v
template <class C>
MPoly<C> content_in(const MPoly<C>& f, unsigned v) {
    auto cs = f.univar_coeffs(v);
    MPoly<C> g(f.nvars());
    for (auto& c : cs) {
        if (c.is_zero()) continue;
        g = poly_gcd(g, c);
        if (g.is_constant() && !g.is_zero()) return MPoly<C>::constant(f.nvars(), C(1));
    }
    return g;
}

namespace detail {

// one pseudo-division step sequence: pseudo-remainder of a by b w.r.t. v
template <class C>
MPoly<C> pseudo_rem(MPoly<C> a, const MPoly<C>& b, unsigned v) {
    unsigned db = b.degree_in(v);
    auto bc = b.univar_coeffs(v);
    const MPoly<C>& lb = bc[db];
    while (!a.is_zero() && a.degree_in(v) >= db) {
        unsigned da = a.degree_in(v);
        auto ac = a.univar_coeffs(v);
        MPoly<C> shift = MPoly<C>::variable(a.nvars(), v, da - db);
        a = a * lb - b * (ac[da] * shift);
    }
    return a;
}

} // namespace detail

// Recursive multivariate gcd over a coefficient field (primitive PRS).
// Result is monic in the global graded-lex leading coefficient, so it is
// canonical; gcd of field constants is 1.
template <class C>
MPoly<C> poly_gcd(const MPoly<C>& a, const MPoly<C>& b) {
    if (a.is_zero()) return monic_normalize(b);
    if (b.is_zero()) return monic_normalize(a);
    unsigned nvars = std::max(a.nvars(), b.nvars());
    if (a.is_constant() || b.is_constant())
        return MPoly<C>::constant(nvars, C(1));
    int va = top_variable(a), vb = top_variable(b);
    unsigned v = static_cast<unsigned>(std::max(va, vb));
    if (!a.involves(v)) return poly_gcd(a, content_in(b, v));
    if (!b.involves(v)) return poly_gcd(b, content_in(a, v));

    MPoly<C> ca = content_in(a, v), cb = content_in(b, v);
    MPoly<C> pa = *a.divide_exact(ca), pb = *b.divide_exact(cb);
    MPoly<C> cg = poly_gcd(ca, cb);

    if (pa.degree_in(v) < pb.degree_in(v)) std::swap(pa, pb);
    while (true) {
        MPoly<C> r = detail::pseudo_rem(pa, pb, v);
        if (r.is_zero()) break;
        if (r.degree_in(v) == 0) {
            pb = MPoly<C>::constant(nvars, C(1));
            break;
        }
        r = *r.divide_exact(content_in(r, v)); // primitive PRS
        pa = std::move(pb);
        pb = std::move(r);
    }
    MPoly<C> pp = *pb.divide_exact(content_in(pb, v));
    return monic_normalize(cg * pp);
}

// Squarefree decomposition: f = unit * prod A_i^i with the A_i monic,
// squarefree and pairwise coprime. Yun's algorithm on the primitive part of
// a chosen variable, recursing on the content.
template <class C>
struct SquarefreeDecomposition {
    C unit{0};
    std::vector<std::pair<MPoly<C>, unsigned>> factors; // (A_i, i), A_i nonconstant
};

template <class C>
SquarefreeDecomposition<C> squarefree_decomposition(const MPoly<C>& f) {
    SquarefreeDecomposition<C> out;
    if (f.is_zero()) throw std::domain_error("squarefree_decomposition: zero input");
    if (f.is_constant()) {
        out.unit = f.leading_coeff();
        return out;
    }
    unsigned v = static_cast<unsigned>(top_variable(f));
    MPoly<C> cont = content_in(f, v);
    MPoly<C> prim = *f.divide_exact(cont);

    // Yun on prim with respect to v
    MPoly<C> fp = prim.derivative(v);
    MPoly<C> a = poly_gcd(prim, fp);
    MPoly<C> bpart = *prim.divide_exact(a);
    MPoly<C> cpart = *fp.divide_exact(a);
    MPoly<C> d = cpart - bpart.derivative(v);
    unsigned i = 1;
    C unit = C(1);
    std::vector<std::pair<MPoly<C>, unsigned>> fs;
    while (!bpart.is_constant()) {
        MPoly<C> ai = poly_gcd(bpart, d);
        bpart = *bpart.divide_exact(ai);
        cpart = *d.divide_exact(ai);
        d = cpart - bpart.derivative(v);
        if (!ai.is_constant()) fs.emplace_back(ai, i);
        ++i;
    }
    unit = unit * bpart.leading_coeff(); // residual constant from normalization
    // fold in leading coefficients so each A_i is monic
    for (auto& [ai, e] : fs) {
        C lc = ai.leading_coeff();
        for (unsigned k = 0; k < e; ++k) unit = unit * lc;
        ai = ai / lc;
    }

    SquarefreeDecomposition<C> rest = squarefree_decomposition(cont);
    out.unit = unit * rest.unit;
    out.factors = std::move(fs);
    for (auto& [g, e] : rest.factors) {
        bool merged = false;
        for (auto& [h, e2] : out.factors) {
            if (e2 == e) { h = h * g; merged = true; break; }
        }
        if (!merged) out.factors.emplace_back(g, e);
    }
    return out;
}

// squarefree part: product of the distinct factors (monic)
template <class C>
MPoly<C> squarefree_part(const MPoly<C>& f) {
    auto dec = squarefree_decomposition(f);
    MPoly<C> r = MPoly<C>::constant(f.nvars(), C(1));
    for (auto& [g, e] : dec.factors) r = r * g;
    return r;
}

} // namespace nlho
