#include "nlho/geometry.hpp"

#include "nlho/linalg.hpp"

#include <algorithm>
#include <map>

namespace nlho {

namespace {

Poly det_rec(const std::vector<Poly>& m, std::vector<size_t> rows, std::vector<size_t> cols,
             size_t n) {
    if (rows.size() == 1) return m[rows[0] * n + cols[0]];
    Poly acc(m[0].nvars());
    for (size_t k = 0; k < cols.size(); ++k) {
        const Poly& piv = m[rows[0] * n + cols[k]];
        if (piv.is_zero()) continue;
        std::vector<size_t> r2(rows.begin() + 1, rows.end());
        std::vector<size_t> c2;
        for (size_t j = 0; j < cols.size(); ++j)
            if (j != k) c2.push_back(cols[j]);
        Poly minor = det_rec(m, r2, c2, n);
        Poly term = piv * minor;
        acc = (k % 2 == 0) ? acc + term : acc - term;
    }
    return acc;
}

std::string idx3(size_t i, size_t j, size_t k) {
    return "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "," + std::to_string(k + 1) + ")";
}

} // namespace

Poly MongeMetric::det() const {
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    return det_rec(e, idx, idx, n);
}

std::vector<Ratio> MongeMetric::inverse() const {
    Poly d = det();
    if (d.is_zero()) throw MathError("metric is degenerate (det g = 0)");
    std::vector<Ratio> inv(n * n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            std::vector<size_t> rows, cols;
            for (size_t r = 0; r < n; ++r)
                if (r != j) rows.push_back(r);
            for (size_t c = 0; c < n; ++c)
                if (c != i) cols.push_back(c);
            Poly cof = n == 1 ? Poly::constant(e[0].nvars(), Scalar(1)) : det_rec(e, rows, cols, n);
            if ((i + j) % 2) cof = -cof;
            inv[i * n + j] = Ratio(std::move(cof), d);
        }
    return inv;
}

MongeMetric make_metric(ContextPtr ctx, std::vector<Poly> entries) {
    MongeMetric g;
    g.ctx = std::move(ctx);
    size_t n = g.ctx->ncoords();
    if (entries.size() != n * n) throw Error("metric: wrong entry count");
    g.n = n;
    g.e = std::move(entries);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < i; ++j)
            if (g.at(i, j) != g.at(j, i)) throw MathError("metric: not symmetric");
    return g;
}

WForm make_wform(size_t n, std::vector<Ratio> rho, Ratio R) {
    WForm w;
    w.n = n;
    if (rho.size() != n * n) throw Error("w-form: wrong entry count");
    w.rho = std::move(rho);
    for (size_t i = 0; i < n; ++i) {
        if (!w.at(i, i).is_zero()) throw MathError("w-form: diagonal not zero");
        for (size_t j = 0; j < i; ++j)
            if (!(w.at(i, j) == -w.at(j, i))) throw MathError("w-form: not skew");
    }
    if (R.is_zero()) {
        if (!w.is_zero()) throw MathError("w-form: radicand vanishes identically");
        w.R = Ratio(1);
    } else {
        w.R = std::move(R);
    }
    return w;
}

MongeCheck is_monge(const MongeMetric& g) {
    MongeCheck r;
    r.degenerate = g.det().is_zero();
    size_t n = g.n;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i; j < n; ++j)
            for (size_t k = j; k < n; ++k) {
                Poly s = diff(g.at(i, j), (unsigned)k) + diff(g.at(j, k), (unsigned)i) +
                         diff(g.at(k, i), (unsigned)j);
                if (!s.is_zero()) r.violations.push_back({i + 1, j + 1, k + 1});
            }
    r.monge = r.violations.empty() && !r.degenerate;
    return r;
}

Connection derive_c(const MongeMetric& g) {
    MongeCheck mc = is_monge(g);
    if (mc.degenerate) throw MathError("derive_c: degenerate metric");
    if (!mc.monge) throw MathError("derive_c: metric is not Monge");
    size_t n = g.n;
    std::vector<Ratio> ginv = g.inverse();
    Connection c;
    c.n = n;
    c.c.assign(n * n * n, Ratio());
    Scalar third = Scalar(1) / Scalar(3);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            for (size_t k = 0; k < n; ++k) {
                Ratio acc;
                for (size_t a = 0; a < n; ++a)
                    for (size_t b = 0; b < n; ++b) {
                        Poly d = diff(g.at(b, k), (unsigned)a) - diff(g.at(b, a), (unsigned)k);
                        if (d.is_zero()) continue;
                        acc += ginv[a * n + i] * ginv[b * n + j] * Ratio(std::move(d));
                    }
                c.at(i, j, k) = acc * Ratio(Scalar(third));
            }
    return c;
}

LoweredConnection lower_connection(const MongeMetric& g, const Connection& c) {
    size_t n = g.n;
    LoweredConnection lc;
    lc.n = n;
    lc.mid.assign(n * n * n, Ratio());
    lc.low.assign(n * n * n, Ratio());
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            for (size_t k = 0; k < n; ++k) {
                Ratio acc;
                for (size_t s = 0; s < n; ++s) acc += Ratio(g.at(j, s)) * c.at(s, i, k);
                lc.mid[(i * n + j) * n + k] = acc;
            }
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            for (size_t k = 0; k < n; ++k) {
                Ratio acc;
                for (size_t s = 0; s < n; ++s) acc += Ratio(g.at(i, s)) * lc.cmid(s, j, k);
                lc.low[(i * n + j) * n + k] = acc;
            }
    return lc;
}

namespace {

struct UpperCache {
    size_t n;
    const OperatorData* op;
    std::vector<Ratio> ginv;                  // g^{ij}
    std::vector<std::vector<Ratio>> dginv;    // dginv[l][i*n+j] = g^{ij}_{,l}
    std::vector<std::vector<Ratio>> sigma;    // per tail: sigma^i_k = g^{is} rho_{sk}
    std::vector<std::vector<Ratio>> dlogR;    // per tail: R_{,l} / (2R)
};

UpperCache build_upper(const OperatorData& op) {
    UpperCache u;
    u.n = op.g.n;
    u.op = &op;
    u.ginv = op.g.inverse();
    size_t n = u.n;
    u.dginv.resize(n);
    for (size_t l = 0; l < n; ++l) {
        u.dginv[l].resize(n * n);
        for (size_t i = 0; i < n * n; ++i) u.dginv[l][i] = u.ginv[i].derivative((unsigned)l);
    }
    for (auto& t : op.tails) {
        std::vector<Ratio> sig(n * n);
        for (size_t i = 0; i < n; ++i)
            for (size_t k = 0; k < n; ++k) {
                Ratio acc;
                for (size_t s = 0; s < n; ++s) acc += u.ginv[i * n + s] * t.at(s, k);
                sig[i * n + k] = acc;
            }
        u.sigma.push_back(std::move(sig));
        std::vector<Ratio> dl(n);
        Ratio half(Scalar(Rat(1, 2)));
        for (size_t l = 0; l < n; ++l) dl[l] = t.R.derivative((unsigned)l) / t.R * half;
        u.dlogR.push_back(std::move(dl));
    }
    return u;
}

// report item covering one indexed family of residuals
template <class F>
void check_family(CondReport& rep, const std::string& name, size_t n, unsigned arity,
                  const Context& ctx, F f) {
    std::vector<size_t> idx(arity, 0);
    bool ok = true;
    std::string res;
    while (true) {
        Ratio r = f(idx);
        if (!r.is_zero()) {
            ok = false;
            std::string tup = "(";
            for (unsigned a = 0; a < arity; ++a)
                tup += (a ? "," : "") + std::to_string(idx[a] + 1);
            tup += ")";
            res = tup + ": " + print_ratio(r, ctx, true);
            break;
        }
        unsigned a = 0;
        for (; a < arity; ++a) {
            if (++idx[a] < n) break;
            idx[a] = 0;
        }
        if (a == arity) break;
    }
    rep.add(name, ok, res);
}

} // namespace

CondReport check_conditions_upper(const OperatorData& op) {
    CondReport rep;
    const Context& ctx = *op.g.ctx;
    size_t n = op.g.n;
    if (op.g.det().is_zero()) throw MathError("check_conditions: degenerate metric");
    for (auto& t : op.tails)
        if (t.R.is_zero()) throw MathError("check_conditions: radicand vanishes");
    UpperCache u = build_upper(op);
    const Connection& c = op.c;

    check_family(rep, "1: g^{ij} = g^{ji}", n, 2, ctx, [&](auto& ix) {
        return u.ginv[ix[0] * n + ix[1]] - u.ginv[ix[1] * n + ix[0]];
    });
    check_family(rep, "2: g^{ij}_,k = c^{ij}_k + c^{ji}_k", n, 3, ctx, [&](auto& ix) {
        size_t i = ix[0], j = ix[1], k = ix[2];
        return u.dginv[k][i * n + j] - c.at(i, j, k) - c.at(j, i, k);
    });
    check_family(rep, "3: c^{ij}_s g^{sk} + c^{kj}_s g^{si} = 0", n, 3, ctx, [&](auto& ix) {
        size_t i = ix[0], j = ix[1], k = ix[2];
        Ratio acc;
        for (size_t s = 0; s < n; ++s)
            acc += c.at(i, j, s) * u.ginv[s * n + k] + c.at(k, j, s) * u.ginv[s * n + i];
        return acc;
    });
    check_family(rep, "4: cyclic c^{ij}_s g^{sk}", n, 3, ctx, [&](auto& ix) {
        size_t i = ix[0], j = ix[1], k = ix[2];
        Ratio acc;
        for (size_t s = 0; s < n; ++s)
            acc += c.at(i, j, s) * u.ginv[s * n + k] + c.at(j, k, s) * u.ginv[s * n + i] +
                   c.at(k, i, s) * u.ginv[s * n + j];
        return acc;
    });
    for (size_t a = 0; a < op.tails.size(); ++a) {
        std::string tag = op.tails.size() > 1 ? " [tail " + std::to_string(a + 1) + "]" : "";
        const auto& sig = u.sigma[a];
        const auto& dlr = u.dlogR[a];
        check_family(rep, "5: g^{is} w^k_s + g^{ks} w^i_s = 0" + tag, n, 2, ctx, [&](auto& ix) {
            size_t i = ix[0], k = ix[1];
            Ratio acc;
            for (size_t s = 0; s < n; ++s)
                acc += u.ginv[i * n + s] * sig[k * n + s] + u.ginv[k * n + s] * sig[i * n + s];
            return acc;
        });
        check_family(rep, "6: g^{ks} w^j_{s,l} + g^{js}_{,l} w^k_s - c^{jk}_s w^s_l + c^{kj}_s w^s_l = 0" + tag,
                     n, 3, ctx, [&](auto& ix) {
            size_t k = ix[0], j = ix[1], l = ix[2];
            Ratio acc;
            for (size_t s = 0; s < n; ++s) {
                Ratio dws = sig[j * n + s].derivative((unsigned)l) + sig[j * n + s] * dlr[l];
                acc += u.ginv[k * n + s] * dws + u.dginv[l][j * n + s] * sig[k * n + s] -
                       c.at(j, k, s) * sig[s * n + l] + c.at(k, j, s) * sig[s * n + l];
            }
            return acc;
        });
    }
    check_family(rep, "7: g^{ks} c^{ij}_{s,l} + c^{kj}_s g^{si}_{,l} + c^{ki}_s c^{sj}_l - c^{ik}_s c^{sj}_l + g^{ks} w^i_s w^j_l = 0",
                 n, 4, ctx, [&](auto& ix) {
        size_t k = ix[0], i = ix[1], j = ix[2], l = ix[3];
        Ratio acc;
        for (size_t s = 0; s < n; ++s) {
            acc += u.ginv[k * n + s] * c.at(i, j, s).derivative((unsigned)l) +
                   c.at(k, j, s) * u.dginv[l][s * n + i] +
                   c.at(k, i, s) * c.at(s, j, l) - c.at(i, k, s) * c.at(s, j, l);
            for (size_t a = 0; a < op.tails.size(); ++a)
                acc += u.ginv[k * n + s] * u.sigma[a][i * n + s] * u.sigma[a][j * n + l] * op.tails[a].R;
        }
        return acc;
    });
    return rep;
}

CondReport check_conditions_lower(const OperatorData& op) {
    CondReport rep;
    const Context& ctx = *op.g.ctx;
    size_t n = op.g.n;
    if (op.g.det().is_zero()) throw MathError("check_conditions: degenerate metric");
    for (auto& t : op.tails)
        if (t.R.is_zero()) throw MathError("check_conditions: radicand vanishes");
    LoweredConnection lc = lower_connection(op.g, op.c);
    const MongeMetric& g = op.g;

    check_family(rep, "1: nabla g = 0", n, 3, ctx, [&](auto& ix) {
        size_t i = ix[0], j = ix[1], k = ix[2];
        return Ratio(diff(g.at(i, j), (unsigned)k)) + lc.clow(i, j, k) + lc.clow(j, i, k);
    });
    check_family(rep, "2: c_{ijk} + c_{ikj} = 0", n, 3, ctx, [&](auto& ix) {
        return lc.clow(ix[0], ix[1], ix[2]) + lc.clow(ix[0], ix[2], ix[1]);
    });
    check_family(rep, "3: g_{ij,k} + g_{jk,i} + g_{ki,j} = 0", n, 3, ctx, [&](auto& ix) {
        size_t i = ix[0], j = ix[1], k = ix[2];
        return Ratio(diff(g.at(i, j), (unsigned)k) + diff(g.at(j, k), (unsigned)i) +
                     diff(g.at(k, i), (unsigned)j));
    });
    for (size_t a = 0; a < op.tails.size(); ++a) {
        std::string tag = op.tails.size() > 1 ? " [tail " + std::to_string(a + 1) + "]" : "";
        const WForm& w = op.tails[a];
        Ratio half(Scalar(Rat(1, 2)));
        check_family(rep, "4: w_{ij} + w_{ji} = 0" + tag, n, 2, ctx, [&](auto& ix) {
            return w.at(ix[0], ix[1]) + w.at(ix[1], ix[0]);
        });
        check_family(rep, "5: w_{ij,l} - c^s_{ij} w_{sl} = 0" + tag, n, 3, ctx, [&](auto& ix) {
            size_t i = ix[0], j = ix[1], l = ix[2];
            Ratio acc = w.at(i, j).derivative((unsigned)l) +
                        w.at(i, j) * w.R.derivative((unsigned)l) / w.R * half;
            for (size_t s = 0; s < n; ++s) acc -= lc.cmid(s, i, j) * w.at(s, l);
            return acc;
        });
    }
    check_family(rep, "6: c_{nml,k} + c^s_{ml} c_{snk} + w_{ml} w_{nk} = 0", n, 4, ctx, [&](auto& ix) {
        size_t nn = ix[0], m = ix[1], l = ix[2], k = ix[3];
        Ratio acc = lc.clow(nn, m, l).derivative((unsigned)k);
        for (size_t s = 0; s < n; ++s) acc += lc.cmid(s, m, l) * lc.clow(s, nn, k);
        for (auto& w : op.tails) acc += w.at(m, l) * w.at(nn, k) * w.R;
        return acc;
    });
    return rep;
}

CurvatureReport curvature_check(const MongeMetric& g, const Connection& c, const WForm& w) {
    CurvatureReport rep;
    size_t n = g.n;
    LoweredConnection lc = lower_connection(g, c);
    for (size_t nn = 0; nn < n && rep.zero; ++nn)
        for (size_t m = 0; m < n && rep.zero; ++m)
            for (size_t l = 0; l < n && rep.zero; ++l)
                for (size_t k = 0; k < n; ++k) {
                    Ratio acc = lc.clow(nn, m, l).derivative((unsigned)k);
                    for (size_t s = 0; s < n; ++s) acc += lc.cmid(s, m, l) * lc.clow(s, nn, k);
                    acc += w.at(m, l) * w.at(nn, k) * w.R;
                    if (!acc.is_zero()) {
                        rep.zero = false;
                        rep.first_residual =
                            idx3(nn, m, l) + ",k=" + std::to_string(k + 1) + ": " +
                            print_ratio(acc, *g.ctx, true);
                        break;
                    }
                }
    // R_{ijji} = -(c_{iij,j} + c^s_{ij} c_{sij}) for i<j, the diagonal of the
    // curvature relation; equals w_{ij}^2 when the relation holds
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            Ratio acc = lc.clow(i, i, j).derivative((unsigned)j);
            for (size_t s = 0; s < n; ++s) acc += lc.cmid(s, i, j) * lc.clow(s, i, j);
            std::string name = "R_" + std::to_string(i + 1) + std::to_string(j + 1) +
                               std::to_string(j + 1) + std::to_string(i + 1);
            rep.diagonal.emplace_back(name, -acc);
        }
    return rep;
}

namespace {

// splits sqrt(f) for a PFrac known only up to squares: f = unit * core with
// core squarefree; returns (multiplier, core) with sqrt(f) = multiplier*sqrt(core)
std::pair<Scalar, Scalar> pfrac_sqrt_split(const PFrac& f) {
    PPoly prod = f.num() * f.den();
    auto dec = squarefree_decomposition(prod);
    PPoly core = PPoly::constant(prod.nvars(), Rat(1));
    PPoly sq = PPoly::constant(prod.nvars(), Rat(1));
    for (auto& [a, e] : dec.factors) {
        if (e % 2) core = core * a;
        for (unsigned k = 0; k < e / 2; ++k) sq = sq * a;
    }
    mpz_class s, q;
    Rat u = dec.unit;
    squarefree_split(mpz_class(u.get_num() * u.get_den()), s, q);
    Rat outer(q, u.get_den());
    outer.canonicalize();
    Scalar mult = Scalar(PFrac(sq * outer, f.den()));
    Scalar corev = Scalar(PFrac(core * Rat(s)));
    return {mult, corev};
}

} // namespace

WForm canonical_wform(const WForm& w) {
    size_t n = w.n;
    if (w.is_zero()) return WForm::zero(n);
    // sqrt(N/D) = (q/D) * sqrt(unit * core), N*D = unit * core * q^2
    Poly prod = w.R.num() * w.R.den();
    auto dec = squarefree_decomposition(prod);
    Poly core = Poly::constant(prod.nvars(), Scalar(1));
    Poly sq = Poly::constant(prod.nvars(), Scalar(1));
    for (auto& [a, e] : dec.factors) {
        if (e % 2) core = core * a;
        for (unsigned k = 0; k < e / 2; ++k) sq = sq * a;
    }
    Scalar unit = dec.unit;
    if (!unit.is_root_free())
        throw MathError("canonical_wform: radicand with root-symbol content unsupported");
    auto [mult, corev] = pfrac_sqrt_split(unit.fraction());
    Ratio factor = Ratio(sq * mult) / Ratio(w.R.den());
    Ratio Rcan = Ratio(core * corev);

    WForm out;
    out.n = n;
    out.rho.assign(n * n, Ratio());
    for (size_t i = 0; i < n * n; ++i) out.rho[i] = w.rho[i] * factor;
    out.R = Rcan;
    // sign convention: first nonzero rho_{ij} (i<j, row-major) has positive
    // leading numerator coefficient
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            const Ratio& r = out.at(i, j);
            if (r.is_zero()) continue;
            if (r.num().leading_coeff().norm_sign() < 0)
                for (auto& x : out.rho) x = -x;
            goto done;
        }
    }
done:
    return out;
}

bool wform_equal_up_to_sign(const WForm& a, const WForm& b) {
    if (a.n != b.n) return false;
    WForm ca = canonical_wform(a), cb = canonical_wform(b);
    if (!(ca.R == cb.R)) return false;
    for (size_t i = 0; i < ca.rho.size(); ++i)
        if (!(ca.rho[i] == cb.rho[i])) return false;
    return true;
}

DeriveWResult derive_w(const MongeMetric& g) {
    MongeCheck mc = is_monge(g);
    if (!mc.monge) throw MathError("derive_w: metric is not Monge");
    size_t n = g.n;
    Connection c = derive_c(g);
    LoweredConnection lc = lower_connection(g, c);

    // K_(nk)(ml) = -(c_{nml,k} + c^s_{ml} c_{snk}), expected to equal w_{nk} w_{ml}
    std::vector<Ratio> K(n * n * n * n);
    auto at = [&](size_t a, size_t b, size_t cc, size_t d) -> Ratio& {
        return K[((a * n + b) * n + cc) * n + d];
    };
    for (size_t nn = 0; nn < n; ++nn)
        for (size_t k = 0; k < n; ++k)
            for (size_t m = 0; m < n; ++m)
                for (size_t l = 0; l < n; ++l) {
                    Ratio acc = lc.clow(nn, m, l).derivative((unsigned)k);
                    for (size_t s = 0; s < n; ++s) acc += lc.cmid(s, m, l) * lc.clow(s, nn, k);
                    at(nn, k, m, l) = -acc;
                }
    DeriveWResult out;
    for (size_t a = 0; a < n; ++a)
        for (size_t b = 0; b < n; ++b)
            for (size_t cc = 0; cc < n; ++cc)
                for (size_t d = 0; d < n; ++d) {
                    if (!(at(a, b, cc, d) == at(cc, d, a, b)) ||
                        !(at(a, b, cc, d) == -at(b, a, cc, d)) ||
                        !(at(a, b, cc, d) == -at(a, b, d, cc))) {
                        out.reason = "curvature bilinear form lacks the symmetries of an outer square";
                        return out;
                    }
                }

    std::vector<std::pair<size_t, size_t>> pairs;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    size_t P = pairs.size();
    bool allzero = true;
    size_t pivot = P;
    for (size_t p = 0; p < P && allzero; ++p)
        for (size_t q = 0; q < P; ++q)
            if (!at(pairs[p].first, pairs[p].second, pairs[q].first, pairs[q].second).is_zero()) {
                allzero = false;
                break;
            }
    if (allzero) {
        out.w = WForm::zero(n);
        return out;
    }
    for (size_t p = 0; p < P; ++p)
        if (!at(pairs[p].first, pairs[p].second, pairs[p].first, pairs[p].second).is_zero()) {
            pivot = p;
            break;
        }
    if (pivot == P) {
        out.reason = "no diagonal entry w_{ij}^2 is nonzero while the form is nonzero";
        return out;
    }
    Ratio Rraw = at(pairs[pivot].first, pairs[pivot].second, pairs[pivot].first, pairs[pivot].second);
    std::vector<Ratio> rho_p(P);
    rho_p[pivot] = Ratio(1);
    for (size_t q = 0; q < P; ++q) {
        if (q == pivot) continue;
        rho_p[q] = at(pairs[q].first, pairs[q].second, pairs[pivot].first, pairs[pivot].second) / Rraw;
    }
    for (size_t p = 0; p < P; ++p)
        for (size_t q = 0; q < P; ++q) {
            Ratio want = rho_p[p] * rho_p[q] * Rraw;
            if (!(at(pairs[p].first, pairs[p].second, pairs[q].first, pairs[q].second) == want)) {
                out.reason = "curvature bilinear form is not a rank-one outer square";
                return out;
            }
        }
    WForm w;
    w.n = n;
    w.rho.assign(n * n, Ratio());
    for (size_t p = 0; p < P; ++p) {
        w.at(pairs[p].first, pairs[p].second) = rho_p[p];
        w.at(pairs[p].second, pairs[p].first) = -rho_p[p];
    }
    w.R = Rraw;
    WForm can = canonical_wform(w);

    OperatorData op{g, c, {can}};
    CondReport check = check_conditions_lower(op);
    if (!check.pass) {
        out.reason = "curvature factorizes but the w-derivative condition fails";
        return out;
    }
    out.w = std::move(can);
    return out;
}

SingularVariety singular_variety(const MongeMetric& g) {
    SingularVariety sv;
    sv.det = g.det();
    sv.degree = sv.det.total_degree();
    if (!sv.det.is_zero()) sv.square_part = perfect_square(sv.det);
    return sv;
}

OperatorData projective_transform(const OperatorData& op, const std::vector<Scalar>& M) {
    size_t n = op.g.n;
    size_t m = n + 1;
    if (M.size() != m * m) throw Error("projective_transform: matrix must be (n+1)x(n+1)");
    Mat<Scalar> Mm(m, std::vector<Scalar>(m));
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < m; ++j) Mm[i][j] = M[i * m + j];
    auto Minv = inverse(Mm);
    if (!Minv) throw MathError("projective_transform: singular matrix");

    const Context& ctx = *op.g.ctx;
    // u^i(u~) = m^i(u~) / m(u~) from the rows of M^{-1}
    auto row_form = [&](size_t r) {
        Poly f = poly_constant(ctx, (*Minv)[r][n]);
        for (size_t j = 0; j < n; ++j) f = f + poly_coord(ctx, j) * (*Minv)[r][j];
        return f;
    };
    Poly mden = row_form(n);
    if (mden.is_zero()) throw MathError("projective_transform: inverse denominator form vanishes");
    std::vector<Ratio> images(n);
    for (size_t i = 0; i < n; ++i) images[i] = Ratio(row_form(i), mden);
    // l(u(u~)) = 1/m(u~) since M composed with M^{-1} is the identity
    Ratio L = Ratio(Poly::constant((unsigned)n, Scalar(1)), mden);
    std::vector<std::vector<Ratio>> J(n, std::vector<Ratio>(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t k = 0; k < n; ++k) J[i][k] = images[i].derivative((unsigned)k);

    Ratio L2 = L * L;
    Ratio L4 = L2 * L2;
    std::vector<Poly> ge(n * n, Poly((unsigned)n));
    for (size_t k = 0; k < n; ++k)
        for (size_t l = 0; l < n; ++l) {
            Ratio acc;
            for (size_t i = 0; i < n; ++i)
                for (size_t j = 0; j < n; ++j) {
                    if (op.g.at(i, j).is_zero()) continue;
                    acc += Ratio(op.g.at(i, j)).substitute(images) * J[i][k] * J[j][l];
                }
            acc = acc / L4;
            if (!acc.is_polynomial())
                throw MathError("projective_transform: transformed metric not polynomial");
            ge[k * n + l] = acc.poly();
        }
    MongeMetric gt = make_metric(op.g.ctx, std::move(ge));
    MongeCheck mc = is_monge(gt);
    if (!mc.monge) throw MathError("projective_transform: transformed metric not Monge");

    std::vector<WForm> tails;
    for (auto& w : op.tails) {
        WForm wt;
        wt.n = n;
        wt.rho.assign(n * n, Ratio());
        for (size_t k = 0; k < n; ++k)
            for (size_t l = 0; l < n; ++l) {
                Ratio acc;
                for (size_t i = 0; i < n; ++i)
                    for (size_t j = 0; j < n; ++j) {
                        if (w.at(i, j).is_zero()) continue;
                        acc += w.at(i, j).substitute(images) * J[i][k] * J[j][l];
                    }
                wt.at(k, l) = acc / L2;
            }
        wt.R = w.R.substitute(images);
        tails.push_back(canonical_wform(wt));
    }
    return OperatorData{gt, derive_c(gt), std::move(tails)};
}

Classify2Result classify2(const MongeMetric& g) {
    if (g.n != 2) throw Error("classify2: needs a 2-component metric");
    MongeCheck mc = is_monge(g);
    if (!mc.monge) throw MathError("classify2: metric is not Monge");
    const Context& ctx = *g.ctx;

    // expansion g = a (p dq - q dp)^2 + 2 (p dq - q dp)(b dp + c dq)
    //              + alpha dp^2 + 2 beta dp dq + gamma dq^2
    auto extract = [&](const MongeMetric& gg) {
        Mono m(2);
        auto coeff_of = [&](const Poly& f, unsigned ep, unsigned eq) {
            Mono mm(2);
            mm.set(0, ep);
            mm.set(1, eq);
            return f.coeff(mm);
        };
        Classify2Result r;
        r.a = coeff_of(gg.at(0, 0), 0, 2);
        r.b = Scalar(Rat(-1, 2)) * coeff_of(gg.at(0, 0), 0, 1);
        r.alpha = coeff_of(gg.at(0, 0), 0, 0);
        r.c = Scalar(Rat(1, 2)) * coeff_of(gg.at(1, 1), 1, 0);
        r.gamma = coeff_of(gg.at(1, 1), 0, 0);
        r.beta = coeff_of(gg.at(0, 1), 0, 0);
        return r;
    };
    Classify2Result r = extract(g);
    {
        // the six constants determine a Monge 2-metric completely; re-expand
        // to validate the decomposition
        Poly p = poly_coord(ctx, 0), q = poly_coord(ctx, 1);
        Poly one = poly_constant(ctx, Scalar(1));
        Poly g11 = q * q * r.a - q * (r.b * Scalar(2)) + one * r.alpha;
        Poly g12 = -(p * q * r.a) + p * r.b - q * r.c + one * r.beta;
        Poly g22 = p * p * r.a + p * (r.c * Scalar(2)) + one * r.gamma;
        if (g.at(0, 0) != g11 || g.at(0, 1) != g12 || g.at(1, 1) != g22)
            throw MathError("classify2: metric is not a quadratic form in dp, dq, p dq - q dp");
    }

    if (!r.a.is_zero()) {
        // translate p -> p - c/a, q -> q + b/a to kill b and c
        Scalar sp = -(r.c / r.a), tq = r.b / r.a;
        std::vector<Ratio> images = {Ratio(poly_coord(ctx, 0) + poly_constant(ctx, sp)),
                                     Ratio(poly_coord(ctx, 1) + poly_constant(ctx, tq))};
        std::vector<Poly> ge(4, Poly(2));
        for (size_t i = 0; i < 4; ++i) ge[i] = Ratio(g.e[i]).substitute(images).poly();
        MongeMetric gt = make_metric(g.ctx, std::move(ge));
        Classify2Result t = extract(gt);
        Scalar disc = t.alpha * t.gamma - t.beta * t.beta;
        r.translation = std::make_pair(sp, tq);
        r.label = disc.is_zero() ? "a!=0 degenerate (local class)"
                                 : "a!=0 nondegenerate (WKI class)";
        return r;
    }
    if (r.b.is_zero() && r.c.is_zero()) {
        r.label = "constant class";
        return r;
    }
    // a = 0, (b,c) != 0: a linear substitution old = A*new sends the covector
    // (b,c) to (b',0) with b' != 0; then b is rescaled to 1 and alpha, beta are
    // translated away, so gamma alone decides nonlocality
    std::vector<Ratio> images(2);
    if (!r.b.is_zero()) {
        images[0] = Ratio(poly_coord(ctx, 0) - poly_coord(ctx, 1) * r.c);
        images[1] = Ratio(poly_coord(ctx, 1) * r.b);
    } else {
        images[0] = -Ratio(poly_coord(ctx, 1));
        images[1] = Ratio(poly_coord(ctx, 0));
    }
    std::vector<Poly> ge(4, Poly(2));
    for (size_t i = 0; i < 4; ++i) ge[i] = Ratio(g.e[i]).substitute(images).poly();
    MongeMetric gt = make_metric(g.ctx, std::move(ge));
    Classify2Result t = extract(gt);
    // the (p dq - q dp) block rescales by det L; renormalize b to 1
    if (t.a.is_zero() && !t.b.is_zero()) {
        Scalar s = Scalar(1) / t.b;
        for (auto& e : gt.e) e = e * s;
        t = extract(gt);
    }
    // translations p -> p - beta, q -> q + alpha/2 kill alpha and beta
    std::vector<Ratio> tr = {Ratio(poly_coord(ctx, 0) - poly_constant(ctx, t.beta)),
                             Ratio(poly_coord(ctx, 1) + poly_constant(ctx, t.alpha * Scalar(Rat(1, 2))))};
    for (size_t i = 0; i < 4; ++i) gt.e[i] = Ratio(gt.e[i]).substitute(tr).poly();
    t = extract(gt);
    r.gamma = t.gamma;
    r.label = t.gamma.is_zero() ? "a=0 gamma=0 (Monge-Ampere local class)"
                                : "a=0 gamma!=0 (nonlocal class)";
    return r;
}

Rat random_rat(uint64_t& state, long bound) {
    auto next = [&]() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return state;
    };
    long num = static_cast<long>(next() % static_cast<uint64_t>(2 * bound + 1)) - bound;
    long den = static_cast<long>(next() % 9) + 1;
    Rat r(num, den);
    r.canonicalize();
    return r;
}

WConstraintSystem w_constraint_system(const MongeMetric& g, uint64_t seed) {
    MongeCheck mc = is_monge(g);
    if (!mc.monge) throw MathError("w_constraint_system: metric is not Monge");
    size_t n = g.n;
    Connection c = derive_c(g);
    LoweredConnection lc = lower_connection(g, c);

    // D^p_{ijk} = c^p_{ij,k} - c^q_{ij} c^p_{qk}
    std::vector<Ratio> D(n * n * n * n);
    auto Dat = [&](size_t p, size_t i, size_t j, size_t k) -> Ratio& {
        return D[((p * n + i) * n + j) * n + k];
    };
    for (size_t p = 0; p < n; ++p)
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j)
                for (size_t k = 0; k < n; ++k) {
                    Ratio acc = lc.cmid(p, i, j).derivative((unsigned)k);
                    for (size_t q = 0; q < n; ++q) acc -= lc.cmid(q, i, j) * lc.cmid(p, q, k);
                    Dat(p, i, j, k) = acc;
                }

    std::vector<std::pair<size_t, size_t>> pairs;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

    WConstraintSystem sys;
    sys.n = n;
    sys.unknowns = pairs.size();
    auto pair_coeff = [&](size_t p, size_t s, std::vector<Ratio>& row, const Ratio& val) {
        // w_{ps} in the basis w_{(a<b)}; skew handling
        if (p == s) return;
        for (size_t t = 0; t < pairs.size(); ++t) {
            if (pairs[t] == std::make_pair(std::min(p, s), std::max(p, s))) {
                row[t] = row[t] + (p < s ? val : -val);
                return;
            }
        }
    };
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            for (size_t k = 0; k < n; ++k)
                for (size_t s = k + 1; s < n; ++s) {
                    std::vector<Ratio> row(pairs.size(), Ratio());
                    for (size_t p = 0; p < n; ++p) {
                        pair_coeff(p, s, row, Dat(p, i, j, k));
                        pair_coeff(p, k, row, -Dat(p, i, j, s));
                    }
                    bool nz = false;
                    for (auto& x : row)
                        if (!x.is_zero()) { nz = true; break; }
                    if (nz) sys.rows.push_back(std::move(row));
                }
    sys.all_zero = sys.rows.empty();
    if (sys.all_zero) {
        sys.generic_kernel_dim = static_cast<int>(sys.unknowns);
        return sys;
    }

    // generic-point kernel dimension: 3 samples, majority
    uint64_t state = seed ? seed : 1;
    std::map<int, int> votes;
    Poly detg = g.det();
    for (int sample = 0; sample < 3; ++sample) {
        for (int attempt = 0;; ++attempt) {
            if (attempt >= 10) throw MathError("w_constraint_system: cannot find a generic point");
            std::vector<Scalar> pt;
            for (size_t v = 0; v < n; ++v) pt.push_back(Scalar(random_rat(state)));
            try {
                if (detg.eval(pt).is_zero()) continue;
                Mat<Scalar> m(sys.rows.size(), std::vector<Scalar>(sys.unknowns));
                for (size_t r = 0; r < sys.rows.size(); ++r)
                    for (size_t cidx = 0; cidx < sys.unknowns; ++cidx)
                        m[r][cidx] = sys.rows[r][cidx].eval(pt);
                votes[static_cast<int>(sys.unknowns - rank(m))]++;
                break;
            } catch (const MathError&) {
                continue; // evaluation hit a pole; resample
            }
        }
    }
    int best = -1, bestv = 0;
    for (auto& [k, v] : votes)
        if (v > bestv) { best = k; bestv = v; }
    sys.generic_kernel_dim = best;
    return sys;
}

bool WConstraintSystem::contains_symbolically(const WForm& w) const {
    std::vector<Ratio> vec;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) vec.push_back(w.at(i, j));
    for (auto& row : rows) {
        Ratio acc;
        for (size_t t = 0; t < vec.size(); ++t) acc += row[t] * vec[t];
        if (!acc.is_zero()) return false;
    }
    return true;
}

} // namespace nlho
