#pragma once

#include "nlho/parser.hpp"
#include "nlho/poly.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace nlho {

// Symmetric matrix of quadratic polynomials satisfying the cyclic condition
// g_{ij,k} + g_{jk,i} + g_{ki,j} = 0 (checked by is_monge, not the ctor).
struct MongeMetric {
    ContextPtr ctx;
    size_t n = 0;
    std::vector<Poly> e; // row-major n*n

    const Poly& at(size_t i, size_t j) const { return e[i * n + j]; }
    Poly& at(size_t i, size_t j) { return e[i * n + j]; }

    Poly det() const;
    std::vector<Ratio> inverse() const; // g^{ij}, row-major
};

MongeMetric make_metric(ContextPtr ctx, std::vector<Poly> entries);

// c^{ij}_k, two upper and one lower index, row-major [i][j][k]
struct Connection {
    size_t n = 0;
    std::vector<Ratio> c;
    const Ratio& at(size_t i, size_t j, size_t k) const { return c[(i * n + j) * n + k]; }
    Ratio& at(size_t i, size_t j, size_t k) { return c[(i * n + j) * n + k]; }
};

// Nonlocal tail in radical-factored form: w_ij = rho_ij * sqrt(R).
// The zero form is rho = 0, R = 1.
struct WForm {
    size_t n = 0;
    std::vector<Ratio> rho; // skew, row-major
    Ratio R{1};

    const Ratio& at(size_t i, size_t j) const { return rho[i * n + j]; }
    Ratio& at(size_t i, size_t j) { return rho[i * n + j]; }
    bool is_zero() const {
        for (auto& r : rho)
            if (!r.is_zero()) return false;
        return true;
    }
    static WForm zero(size_t n) {
        WForm w;
        w.n = n;
        w.rho.assign(n * n, Ratio());
        return w;
    }
};

WForm make_wform(size_t n, std::vector<Ratio> rho, Ratio R);

// third-order operator data (g, c, nonlocal tails); local when tails empty
struct OperatorData {
    MongeMetric g;
    Connection c;
    std::vector<WForm> tails;
};

// --- reports -----------------------------------------------------------------

struct CondItem {
    std::string name;
    bool pass = true;
    std::string residual; // first failing index tuple and printed polynomial
};

struct CondReport {
    bool pass = true;
    std::vector<CondItem> items;
    void add(std::string name, bool ok, std::string res = "") {
        pass = pass && ok;
        items.push_back({std::move(name), ok, std::move(res)});
    }
};

// --- operations ----------------------------------------------------------------

struct MongeCheck {
    bool monge = false;
    bool degenerate = false;                          // det g identically zero
    std::vector<std::array<size_t, 3>> violations;    // cyclic-condition triples (1-based)
};

MongeCheck is_monge(const MongeMetric& g);

// c^{ij}_k = 1/3 g^{ai} g^{bj} (g_{bk,a} - g_{ba,k}); requires is_monge
Connection derive_c(const MongeMetric& g);

// index gymnastics shared by the checkers
struct LoweredConnection {
    size_t n = 0;
    std::vector<Ratio> mid; // c^i_{jk} = g_{js} c^{si}_k, [i][j][k]
    std::vector<Ratio> low; // c_{ijk} = g_{is} c^s_{jk},  [i][j][k]
    const Ratio& cmid(size_t i, size_t j, size_t k) const { return mid[(i * n + j) * n + k]; }
    const Ratio& clow(size_t i, size_t j, size_t k) const { return low[(i * n + j) * n + k]; }
};
LoweredConnection lower_connection(const MongeMetric& g, const Connection& c);

// the seven equations in upper indices / the six equations in lower indices
CondReport check_conditions_upper(const OperatorData& op);
CondReport check_conditions_lower(const OperatorData& op);

// residual of c_{nml,k} + c^s_{ml} c_{snk} + w_{ml} w_{nk} = 0 together with
// the diagonal values R_{ijji} = w_{ij}^2 of the curvature relation
struct CurvatureReport {
    bool zero = true;
    std::string first_residual;
    std::vector<std::pair<std::string, Ratio>> diagonal; // ("R_ijji", value)
};
CurvatureReport curvature_check(const MongeMetric& g, const Connection& c, const WForm& w);

// canonical radical-factored representative: R squarefree-core, rho carries
// the square cofactor, overall sign fixed by the first nonzero rho entry
WForm canonical_wform(const WForm& w);

// equality of w-forms up to the overall sign ambiguity
bool wform_equal_up_to_sign(const WForm& a, const WForm& b);

struct DeriveWResult {
    std::optional<WForm> w;  // present on success (possibly the zero form)
    std::string reason;      // set when no operator exists
};

// reconstructs w from the metric via the rank-one factorization of
// K_(nk)(ml) = -(c_{nml,k} + c^s_{ml} c_{snk}); returns the zero form for
// local operators and no value when the metric admits no operator
DeriveWResult derive_w(const MongeMetric& g);

// projective action u~ = l^i(u)/l(u), g~ = g/l^4, w~ = w/l^2; M acts on
// homogeneous coordinates (u^1..u^n, 1)
OperatorData projective_transform(const OperatorData& op, const std::vector<Scalar>& M);

struct SingularVariety {
    Poly det;
    unsigned degree = 0;
    std::optional<std::pair<Scalar, Poly>> square_part;
};
SingularVariety singular_variety(const MongeMetric& g);

// decision tree of the 2-component classification
struct Classify2Result {
    std::string label;
    Scalar a, b, c, alpha, beta, gamma;      // coefficients of the differential-basis expansion
    std::optional<std::pair<Scalar, Scalar>> translation; // (p,q) shift used when a != 0
};
Classify2Result classify2(const MongeMetric& g);

// linear system (c^p_{ij,k} - c^q_{ij} c^p_{qk}) w_{ps} = (c^p_{ij,s} - c^q_{ij} c^p_{qs}) w_{pk}
// on the n(n-1)/2 independent components of a skew form
struct WConstraintSystem {
    size_t n = 0;
    size_t unknowns = 0;
    std::vector<std::vector<Ratio>> rows; // coefficient matrix over the pair basis
    int generic_kernel_dim = -1;          // majority over 3 random points
    bool all_zero = false;                // system identically trivial

    bool contains_symbolically(const WForm& w) const;
};
WConstraintSystem w_constraint_system(const MongeMetric& g, uint64_t seed = 20260801);

// random rational in [-bound, bound] with small denominator, for generic-point evaluation
Rat random_rat(uint64_t& state, long bound = 100);

} // namespace nlho
