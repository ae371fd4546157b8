#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "geotherm/error.hpp"
#include "geotherm/poly.hpp"
#include "geotherm/rational_expr.hpp"

namespace geotherm {

// One factor of a metric's determinant (or of a curvature denominator), kept
// separately so singularity searches can run per-factor: root-finding on small
// factors is far better conditioned than on their high-degree product.
struct LabeledFactor {
    std::string label;  // "conformal_factor", "hess_SS", ...
    GenPoly poly;
    int multiplicity = 1;
};

// Symmetric metric on a 2- or 3-dimensional coordinate patch. Components are
// rational expressions; det_factors optionally records a known factorization
// of det(g) supplied by whoever constructed the metric.
class MetricField {
public:
    MetricField(std::vector<VarId> vars, std::vector<std::vector<RationalExpr>> components,
                std::vector<LabeledFactor> det_factors = {})
        : vars_(std::move(vars)),
          g_(std::move(components)),
          det_factors_(std::move(det_factors)) {
        const std::size_t n = vars_.size();
        if (n < 2 || n > 3) throw InvalidParameter("metric dimension must be 2 or 3");
        if (g_.size() != n) throw InvalidParameter("component rows != dimension");
        for (const auto& row : g_)
            if (row.size() != n) throw InvalidParameter("component cols != dimension");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (!(g_[i][j].num() == g_[j][i].num() && g_[i][j].den() == g_[j][i].den()))
                    throw InvalidParameter("metric components not symmetric");
    }

    std::size_t dim() const { return vars_.size(); }
    const std::vector<VarId>& vars() const { return vars_; }
    const RationalExpr& component(std::size_t i, std::size_t j) const { return g_[i][j]; }
    const std::vector<LabeledFactor>& det_factors() const { return det_factors_; }

    // Numeric component matrix at a point.
    std::vector<std::vector<double>> eval(const EvalPoint& x) const {
        const std::size_t n = dim();
        std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m[i][j] = g_[i][j].eval(x);
        return m;
    }

private:
    std::vector<VarId> vars_;
    std::vector<std::vector<RationalExpr>> g_;
    std::vector<LabeledFactor> det_factors_;
};

// Everything derived from one metric: inverse, connection, Ricci, scalar —
// plus the denominator factors carried over for singularity analysis.
struct CurvatureBundle {
    std::vector<VarId> vars;
    std::vector<std::vector<RationalExpr>> inverse;
    // christoffel[a][b][c] = Γ^a_{bc}, symmetric in (b,c).
    std::vector<std::vector<std::vector<RationalExpr>>> christoffel;
    std::vector<std::vector<RationalExpr>> ricci;
    RationalExpr scalar;
    std::vector<LabeledFactor> den_factors;
};

inline RationalExpr metric_det(const MetricField& g) {
    const std::size_t n = g.dim();
    if (n == 2) {
        return g.component(0, 0) * g.component(1, 1) - g.component(0, 1) * g.component(1, 0);
    }
    // Laplace expansion along the first row.
    auto minor2 = [&](std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) {
        return g.component(r0, c0) * g.component(r1, c1) -
               g.component(r0, c1) * g.component(r1, c0);
    };
    return g.component(0, 0) * minor2(1, 2, 1, 2) - g.component(0, 1) * minor2(1, 2, 0, 2) +
           g.component(0, 2) * minor2(1, 2, 0, 1);
}

// Adjugate-over-determinant inverse; valid for n <= 3 only. Degeneracy is a
// property of evaluation points, so nothing is checked here.
inline std::vector<std::vector<RationalExpr>> metric_inverse(const MetricField& g) {
    const std::size_t n = g.dim();
    const RationalExpr det = metric_det(g);
    std::vector<std::vector<RationalExpr>> inv(n, std::vector<RationalExpr>(n));
    if (n == 2) {
        inv[0][0] = g.component(1, 1) / det;
        inv[1][1] = g.component(0, 0) / det;
        inv[0][1] = -g.component(0, 1) / det;
        inv[1][0] = inv[0][1];
        return inv;
    }
    auto cof = [&](std::size_t i, std::size_t j) {
        std::size_t r[2], c[2], ri = 0, ci = 0;
        for (std::size_t k = 0; k < 3; ++k) {
            if (k != i) r[ri++] = k;
            if (k != j) c[ci++] = k;
        }
        RationalExpr m = g.component(r[0], c[0]) * g.component(r[1], c[1]) -
                         g.component(r[0], c[1]) * g.component(r[1], c[0]);
        return ((i + j) % 2 == 0) ? m : -m;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            inv[i][j] = cof(j, i) / det;  // adjugate = transposed cofactors
            if (j != i) inv[j][i] = inv[i][j];
        }
    return inv;
}

// Levi-Civita connection: Γ^a_{bc} = ½ g^{ad}(∂_b g_{dc} + ∂_c g_{db} − ∂_d g_{bc}).
inline std::vector<std::vector<std::vector<RationalExpr>>> christoffel(
    const MetricField& g, const std::vector<std::vector<RationalExpr>>& inv) {
    const std::size_t n = g.dim();
    const auto& vars = g.vars();

    // d_g[d][i][j] = ∂_d g_{ij}
    std::vector<std::vector<std::vector<RationalExpr>>> d_g(
        n, std::vector<std::vector<RationalExpr>>(n, std::vector<RationalExpr>(n)));
    for (std::size_t d = 0; d < n; ++d)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                d_g[d][i][j] = g.component(i, j).diff(vars[d]);
                if (j != i) d_g[d][j][i] = d_g[d][i][j];
            }

    std::vector<std::vector<std::vector<RationalExpr>>> gamma(
        n, std::vector<std::vector<RationalExpr>>(n, std::vector<RationalExpr>(n)));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t c = b; c < n; ++c) {
                RationalExpr sum;
                for (std::size_t d = 0; d < n; ++d) {
                    RationalExpr bracket = d_g[b][d][c] + d_g[c][d][b] - d_g[d][b][c];
                    sum = sum + inv[a][d] * bracket;
                }
                gamma[a][b][c] = 0.5 * sum;
                if (c != b) gamma[a][c][b] = gamma[a][b][c];
            }
    return gamma;
}

inline std::vector<std::vector<std::vector<RationalExpr>>> christoffel(const MetricField& g) {
    return christoffel(g, metric_inverse(g));
}

// Ricci tensor and scalar from the connection:
//   Ric_{bc} = ∂_a Γ^a_{bc} − ∂_b Γ^a_{ac} + Γ^a_{ad} Γ^d_{bc} − Γ^a_{bd} Γ^d_{ac}
//   R = g^{bc} Ric_{bc}
// Fixed convention: the Poincaré half-plane diag(S⁻², S⁻²) has R = −2.
inline CurvatureBundle curvature_bundle(const MetricField& g) {
    CurvatureBundle out;
    out.vars = g.vars();
    out.den_factors = g.det_factors();
    const std::size_t n = g.dim();
    const auto& vars = g.vars();

    out.inverse = metric_inverse(g);
    out.christoffel = christoffel(g, out.inverse);
    const auto& gamma = out.christoffel;

    out.ricci.assign(n, std::vector<RationalExpr>(n));
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = b; c < n; ++c) {
            RationalExpr div_term, trace_term, plus_term, minus_term;
            for (std::size_t a = 0; a < n; ++a) {
                div_term = div_term + gamma[a][b][c].diff(vars[a]);
                trace_term = trace_term + gamma[a][a][c].diff(vars[b]);
                for (std::size_t d = 0; d < n; ++d) {
                    plus_term = plus_term + gamma[a][a][d] * gamma[d][b][c];
                    minus_term = minus_term + gamma[a][b][d] * gamma[d][a][c];
                }
            }
            out.ricci[b][c] = div_term - trace_term + plus_term - minus_term;
            if (c != b) out.ricci[c][b] = out.ricci[b][c];
        }

    RationalExpr scalar;
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < n; ++c) scalar = scalar + out.inverse[b][c] * out.ricci[b][c];
    out.scalar = scalar;
    return out;
}

inline RationalExpr curvature_scalar(const MetricField& g) { return curvature_bundle(g).scalar; }

// Lowered Riemann component R_{abcd} = g_{ae} R^e_{bcd} with
// R^e_{bcd} = ∂_c Γ^e_{db} − ∂_d Γ^e_{cb} + Γ^e_{cf} Γ^f_{db} − Γ^e_{df} Γ^f_{cb}.
// Test hook for the 2D identity R·det(g) = 2·R_{1212}; not on the hot path.
inline RationalExpr riemann_lowered(const MetricField& g, const CurvatureBundle& bundle,
                                    std::size_t a, std::size_t b, std::size_t c,
                                    std::size_t d) {
    const std::size_t n = g.dim();
    const auto& vars = g.vars();
    const auto& gamma = bundle.christoffel;
    RationalExpr out;
    for (std::size_t e = 0; e < n; ++e) {
        RationalExpr up = gamma[e][d][b].diff(vars[c]) - gamma[e][c][b].diff(vars[d]);
        for (std::size_t f = 0; f < n; ++f)
            up = up + gamma[e][c][f] * gamma[f][d][b] - gamma[e][d][f] * gamma[f][c][b];
        out = out + g.component(a, e) * up;
    }
    return out;
}

namespace detail {

inline std::vector<std::vector<double>> invert_numeric(
    const std::vector<std::vector<double>>& m) {
    const std::size_t n = m.size();
    double scale = 0.0;
    for (const auto& row : m)
        for (double v : row) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) throw DegenerateMetric("metric evaluates to the zero matrix");

    std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
    if (n == 2) {
        double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if (std::abs(det) < 1e-14 * scale * scale)
            throw DegenerateMetric("det(g) ~ 0 at sample point");
        inv[0][0] = m[1][1] / det;
        inv[1][1] = m[0][0] / det;
        inv[0][1] = inv[1][0] = -m[0][1] / det;
        return inv;
    }
    double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                 m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                 m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if (std::abs(det) < 1e-14 * scale * scale * scale)
        throw DegenerateMetric("det(g) ~ 0 at sample point");
    auto cof = [&](std::size_t i, std::size_t j) {
        std::size_t r[2], c[2], ri = 0, ci = 0;
        for (std::size_t k = 0; k < 3; ++k) {
            if (k != i) r[ri++] = k;
            if (k != j) c[ci++] = k;
        }
        double v = m[r[0]][c[0]] * m[r[1]][c[1]] - m[r[0]][c[1]] * m[r[1]][c[0]];
        return ((i + j) % 2 == 0) ? v : -v;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv[i][j] = cof(j, i) / det;
    return inv;
}

// Christoffel symbols at x from centrally-differenced first derivatives of the
// numerically evaluated metric. No symbolic differentiation anywhere.
inline std::vector<std::vector<std::vector<double>>> christoffel_numeric(
    const MetricField& g, const EvalPoint& x, double h_rel) {
    const std::size_t n = g.dim();
    const auto& vars = g.vars();

    auto shifted = [&](std::size_t d, double delta) {
        EvalPoint y = x;
        double v = x.at(vars[d]) + delta;
        if (!(v > 0.0)) throw StencilOutOfDomain(vars[d].name);
        y.set(vars[d], v);
        return y;
    };

    auto m0 = g.eval(x);
    std::vector<std::vector<std::vector<double>>> dg(
        n, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)));
    for (std::size_t d = 0; d < n; ++d) {
        double h = h_rel * x.at(vars[d]);
        auto mp = g.eval(shifted(d, +h));
        auto mm = g.eval(shifted(d, -h));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) dg[d][i][j] = (mp[i][j] - mm[i][j]) / (2.0 * h);
    }

    auto inv = invert_numeric(m0);
    std::vector<std::vector<std::vector<double>>> gamma(
        n, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t c = b; c < n; ++c) {
                double sum = 0.0;
                for (std::size_t d = 0; d < n; ++d)
                    sum += inv[a][d] * (dg[b][d][c] + dg[c][d][b] - dg[d][b][c]);
                gamma[a][b][c] = 0.5 * sum;
                if (c != b) gamma[a][c][b] = gamma[a][b][c];
            }
    return gamma;
}

}  // namespace detail

// Scalar curvature at a point from nested central differences of the evaluated
// metric — an oracle fully independent of the symbolic derivative pipeline.
inline double curvature_numeric_oracle(const MetricField& g, const EvalPoint& x,
                                       double h_rel = 1e-4) {
    const std::size_t n = g.dim();
    const auto& vars = g.vars();

    auto gamma0 = detail::christoffel_numeric(g, x, h_rel);

    // d_gamma[b][a][c][d] = ∂_b Γ^a_{cd}, outer central difference.
    std::vector<std::vector<std::vector<std::vector<double>>>> d_gamma(
        n, std::vector<std::vector<std::vector<double>>>(
               n, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0))));
    for (std::size_t b = 0; b < n; ++b) {
        double h = h_rel * x.at(vars[b]);
        EvalPoint xp = x, xm = x;
        double vp = x.at(vars[b]) + h, vm = x.at(vars[b]) - h;
        if (!(vm > 0.0)) throw StencilOutOfDomain(vars[b].name);
        xp.set(vars[b], vp);
        xm.set(vars[b], vm);
        auto gp = detail::christoffel_numeric(g, xp, h_rel);
        auto gm = detail::christoffel_numeric(g, xm, h_rel);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t c = 0; c < n; ++c)
                for (std::size_t d = 0; d < n; ++d)
                    d_gamma[b][a][c][d] = (gp[a][c][d] - gm[a][c][d]) / (2.0 * h);
    }

    auto inv = detail::invert_numeric(g.eval(x));
    double R = 0.0;
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < n; ++c) {
            double ric = 0.0;
            for (std::size_t a = 0; a < n; ++a) {
                ric += d_gamma[a][a][b][c] - d_gamma[b][a][a][c];
                for (std::size_t d = 0; d < n; ++d)
                    ric += gamma0[a][a][d] * gamma0[d][b][c] - gamma0[a][b][d] * gamma0[d][a][c];
            }
            R += inv[b][c] * ric;
        }
    return R;
}

}  // namespace geotherm
