#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <stdexcept>

namespace nlho {

// Exponent vector with graded-lex ordering. Fixed capacity keeps monomials
// POD-cheap; 32 slots covers coordinates, parameters and jet variables.
class Mono {
public:
    static constexpr unsigned kMaxVars = 32;

    Mono() : nvars_(0), deg_(0) { exp_.fill(0); }
    explicit Mono(unsigned nvars) : nvars_(nvars), deg_(0) {
        if (nvars > kMaxVars) throw std::invalid_argument("Mono: too many variables");
        exp_.fill(0);
    }

    unsigned nvars() const { return nvars_; }
    unsigned deg() const { return deg_; }
    unsigned operator[](unsigned v) const { return exp_[v]; }

    void set(unsigned v, unsigned e) {
        if (e > 255) throw std::overflow_error("Mono: exponent overflow");
        deg_ = deg_ - exp_[v] + e;
        exp_[v] = static_cast<uint8_t>(e);
    }

    bool is_one() const { return deg_ == 0; }

    Mono operator*(const Mono& o) const {
        Mono r(*this);
        for (unsigned v = 0; v < nvars_; ++v) {
            unsigned e = exp_[v] + o.exp_[v];
            if (e > 255) throw std::overflow_error("Mono: exponent overflow");
            r.exp_[v] = static_cast<uint8_t>(e);
        }
        r.deg_ = deg_ + o.deg_;
        return r;
    }

    // returns false if not divisible
    bool divide(const Mono& o, Mono& out) const {
        out = Mono(nvars_);
        for (unsigned v = 0; v < nvars_; ++v) {
            if (exp_[v] < o.exp_[v]) return false;
            out.exp_[v] = static_cast<uint8_t>(exp_[v] - o.exp_[v]);
        }
        out.deg_ = deg_ - o.deg_;
        return true;
    }

    bool divisible_by(const Mono& o) const {
        for (unsigned v = 0; v < nvars_; ++v)
            if (exp_[v] < o.exp_[v]) return false;
        return true;
    }

    bool operator==(const Mono& o) const {
        return nvars_ == o.nvars_ && deg_ == o.deg_ &&
               std::memcmp(exp_.data(), o.exp_.data(), nvars_) == 0;
    }
    bool operator!=(const Mono& o) const { return !(*this == o); }

    // graded lexicographic: compare total degree, then exponents left to right
    bool operator<(const Mono& o) const { return cmp(o) < 0; }
    bool operator>(const Mono& o) const { return cmp(o) > 0; }

    int cmp(const Mono& o) const {
        if (deg_ != o.deg_) return deg_ < o.deg_ ? -1 : 1;
        for (unsigned v = 0; v < nvars_; ++v) {
            if (exp_[v] != o.exp_[v]) return exp_[v] > o.exp_[v] ? 1 : -1;
        }
        return 0;
    }

private:
    std::array<uint8_t, kMaxVars> exp_;
    unsigned nvars_;
    unsigned deg_;
};

} // namespace nlho
