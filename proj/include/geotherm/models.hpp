#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "geotherm/error.hpp"
#include "geotherm/metric.hpp"
#include "geotherm/parse.hpp"
#include "geotherm/poly.hpp"
#include "geotherm/rational_expr.hpp"

namespace geotherm {

// Parameters of the power-Maxwell-invariant (PMI) black-hole family.
// s = (i+1)/2 with i a positive integer; the family requires n != 2s, i.e.
// n != i+1, or the charge term degenerates.
struct PmiParams {
    int n = 3;           // spacetime dimension minus one in the entropy law (n >= 3)
    int i = 1;           // i = 2s − 1; i = 1 is the linear Maxwell case
    double l = 1.0;      // AdS curvature radius (reference value when l is a variable)
    bool l_is_variable = false;
    double omega = 0.0;  // unit-sphere area factor 2 π^{n/2} / Γ(n/2)

    Rational s() const { return Rational(i + 1, 2); }
};

enum class ModelKind { pmi, custom };

// A thermodynamic system: ordered coordinates and the fundamental equation
// M(E^a) as a generalized polynomial. params is set for the PMI family only.
struct ThermoModel {
    ModelKind kind = ModelKind::custom;
    std::vector<VarId> vars;
    GenPoly potential;
    std::optional<PmiParams> params;
    std::string name = "custom";

    bool has_var(const VarId& v) const {
        for (const auto& u : vars)
            if (u == v) return true;
        return false;
    }
};

// First derivatives, heat capacity, and the conformal factor of a model.
struct ThermoQuantities {
    GenPoly T;                  // ∂M/∂S
    GenPoly Phi_e;              // ∂M/∂Q (empty when Q is not a coordinate)
    std::optional<GenPoly> L;   // ∂M/∂l, present iff l is a coordinate
    RationalExpr C_Q;           // (∂M/∂S)/(∂²M/∂S²), unreduced
    GenPoly f;                  // Σ_a E^a ∂M/∂E^a
};

inline double omega_factor(int n) {
    return 2.0 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0);
}

namespace detail {

// Integer power that is safe for negative bases (std::pow would be NaN for a
// negative base with a non-integral double exponent computed inexactly).
inline double ipow_signed(double base, long long e) { return int_pow(base, e); }

// Prefactor relating the physical charge Q to the gauge charge q: q = pref·Q^{1/i}.
inline double charge_prefactor(int n, int i, double omega) {
    const double s = (i + 1) / 2.0;
    const double pi = std::numbers::pi;
    return std::pow(8.0 * pi / (std::sqrt(2.0) * s * omega), 1.0 / i) *
           std::sqrt(double(n - 2) / double(n - 1)) * std::pow(double(i), double(i - 1) / i) /
           (n - 2.0 * s);
}

// Coefficient of the charge term before substitution: (2s−1)^{2−2s} (n−1)^{s−1}
// (2s−n)^{2s−1} / (n−2)^s, with the integer powers taken sign-safely.
inline double charge_term_inner(int n, int i) {
    const double s = (i + 1) / 2.0;
    return ipow_signed(double(i), 1 - i) * std::pow(double(n - 1), s - 1.0) *
           ipow_signed(double(i + 1 - n), i) / std::pow(double(n - 2), s);
}

inline void validate_pmi(int n, int i, double l) {
    if (n < 3) throw InvalidParameter("n must be an integer >= 3");
    if (i < 1) throw InvalidParameter("i = 2s-1 must be a positive integer");
    if (n == i + 1) throw InvalidParameter("n = 2s is excluded (charge term degenerates)");
    if (!(l > 0.0)) throw InvalidParameter("l must be > 0");
}

}  // namespace detail

// Fundamental equation of the PMI family:
//   M = P·[(4S/ω)^{(n−2)/(n−1)} + (4S/ω)^{n/(n−1)} l⁻² − A·(4S/ω)^{(2s−n)/((n−1)(2s−1))} q^{2s}]
// with P = (n−1)ω/(16π) and the gauge charge eliminated in favour of the
// physical Q, which turns the last factor into Q^{2s/(2s−1)}. All exponents
// are exact rationals in n and i.
inline ThermoModel build_pmi_model(int n, int i, double l, bool l_is_variable) {
    detail::validate_pmi(n, i, l);

    PmiParams p;
    p.n = n;
    p.i = i;
    p.l = l;
    p.l_is_variable = l_is_variable;
    p.omega = omega_factor(n);

    const double pi = std::numbers::pi;
    const double P = (n - 1) * p.omega / (16.0 * pi);
    const Rational e1(n - 2, n - 1);
    const Rational e2(n, n - 1);
    const Rational e3(i + 1 - n, (n - 1) * i);
    const Rational eQ(i + 1, i);

    auto radius_pow = [&](const Rational& e) { return std::pow(4.0 / p.omega, e.to_double()); };

    const double c1 = P * radius_pow(e1);
    const double c2 = P * radius_pow(e2);
    const double c3 = -P * detail::charge_term_inner(n, i) * radius_pow(e3) *
                      detail::ipow_signed(detail::charge_prefactor(n, i, p.omega), i + 1);

    GenPoly M = GenPoly::monomial(c1, kS, e1);
    if (l_is_variable) {
        ExpVec e;
        e[kS] = e2;
        e[kL] = Rational(-2);
        M = M + GenPoly::monomial(c2, std::move(e));
    } else {
        M = M + GenPoly::monomial(c2 / (l * l), kS, e2);
    }
    ExpVec eq;
    eq[kS] = e3;
    eq[kQ] = eQ;
    M = M + GenPoly::monomial(c3, std::move(eq));

    ThermoModel model;
    model.kind = ModelKind::pmi;
    model.vars = l_is_variable ? std::vector<VarId>{kS, kQ, kL} : std::vector<VarId>{kS, kQ};
    model.potential = std::move(M);
    model.params = p;
    model.name = "pmi(n=" + std::to_string(n) + ",i=" + std::to_string(i) + ")";
    return model;
}

// Arbitrary fundamental equation over a declared coordinate list.
inline ThermoModel build_custom_model(std::vector<VarId> vars, const std::string& potential_text) {
    if (vars.empty()) throw InvalidParameter("custom model needs at least one coordinate");
    std::set<std::string> allowed;
    for (const auto& v : vars) allowed.insert(v.name);
    ThermoModel model;
    model.kind = ModelKind::custom;
    model.vars = std::move(vars);
    model.potential = poly_parse(potential_text, allowed);
    model.name = "custom";
    return model;
}

// Entropy–horizon-radius inverse pair: S = ω r₊^{n−1}/4.
inline double horizon_radius_from_entropy(double S, int n, double omega) {
    if (!(S > 0.0)) throw NonPositiveEntropy();
    return std::pow(4.0 * S / omega, 1.0 / (n - 1));
}

inline double entropy_from_horizon_radius(double r, int n, double omega) {
    if (!(r > 0.0)) throw InvalidParameter("horizon radius must be > 0");
    return omega * std::pow(r, n - 1) / 4.0;
}

// Mass as a function of horizon radius and physical charge — evaluated from
// the radius-form expression directly, independent of the GenPoly route, so
// the two can cross-check each other.
inline double mass_from_horizon(double r, double Q, const PmiParams& p) {
    if (!(r > 0.0)) throw InvalidParameter("horizon radius must be > 0");
    if (Q < 0.0) throw InvalidParameter("charge must be >= 0");
    const double pi = std::numbers::pi;
    const double P = (p.n - 1) * p.omega / (16.0 * pi);
    const double re = double(p.i + 1 - p.n) / p.i;  // (2s−n)/(2s−1)
    const double charge =
        detail::charge_term_inner(p.n, p.i) *
        detail::ipow_signed(detail::charge_prefactor(p.n, p.i, p.omega), p.i + 1) *
        std::pow(Q, double(p.i + 1) / p.i);
    return P * (detail::ipow_signed(r, p.n - 2) + detail::ipow_signed(r, p.n) / (p.l * p.l) -
                charge * std::pow(r, re));
}

// T, Φ_e, L, C_Q = T/(∂_S T), and the conformal factor f = Σ_a E^a ∂_a M.
inline ThermoQuantities thermo_quantities(const ThermoModel& model) {
    ThermoQuantities q;
    q.T = model.potential.diff(kS);
    if (model.has_var(kQ)) q.Phi_e = model.potential.diff(kQ);
    if (model.has_var(kL)) q.L = model.potential.diff(kL);
    q.C_Q = RationalExpr(q.T, q.T.diff(kS));

    GenPoly f = GenPoly::variable(kS) * q.T;
    if (model.has_var(kQ)) f = f + GenPoly::variable(kQ) * q.Phi_e;
    if (model.has_var(kL)) f = f + GenPoly::variable(kL) * (*q.L);
    q.f = std::move(f);
    return q;
}

namespace detail {

inline std::vector<std::vector<GenPoly>> hessian(const ThermoModel& model) {
    const std::size_t n = model.vars.size();
    std::vector<GenPoly> first(n);
    for (std::size_t a = 0; a < n; ++a) first[a] = model.potential.diff(model.vars[a]);
    std::vector<std::vector<GenPoly>> H(n, std::vector<GenPoly>(n));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b) {
            H[a][b] = first[a].diff(model.vars[b]);
            if (b != a) H[b][a] = H[a][b];
        }
    return H;
}

inline void require_metric_dim(const ThermoModel& model) {
    if (model.vars.size() < 2 || model.vars.size() > 3)
        throw InvalidParameter("metrics need 2 or 3 coordinates");
}

}  // namespace detail

// Weinhold metric: the full Hessian of M, cross terms included.
// det factors: the Hessian determinant itself (it does not factor in general).
inline MetricField weinhold_metric(const ThermoModel& model) {
    detail::require_metric_dim(model);
    const std::size_t n = model.vars.size();
    auto H = detail::hessian(model);
    std::vector<std::vector<RationalExpr>> g(n, std::vector<RationalExpr>(n));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) g[a][b] = RationalExpr(H[a][b]);

    GenPoly det;
    if (n == 2) {
        det = H[0][0] * H[1][1] - H[0][1] * H[0][1];
    } else {
        det = H[0][0] * (H[1][1] * H[2][2] - H[1][2] * H[1][2]) -
              H[0][1] * (H[0][1] * H[2][2] - H[1][2] * H[0][2]) +
              H[0][2] * (H[0][1] * H[1][2] - H[1][1] * H[0][2]);
    }
    std::vector<LabeledFactor> factors{{"hess_det", std::move(det), 1}};
    return MetricField(model.vars, std::move(g), std::move(factors));
}

// Ruppeiner metric: Weinhold conformally rescaled by 1/T.
inline MetricField ruppeiner_metric(const ThermoModel& model) {
    detail::require_metric_dim(model);
    const std::size_t n = model.vars.size();
    MetricField w = weinhold_metric(model);
    GenPoly T = model.potential.diff(kS);
    std::vector<std::vector<RationalExpr>> g(n, std::vector<RationalExpr>(n));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            g[a][b] = RationalExpr(w.component(a, b).num(), T);

    std::vector<LabeledFactor> factors = w.det_factors();
    factors.push_back({"temperature", std::move(T), static_cast<int>(n)});
    return MetricField(model.vars, std::move(g), std::move(factors));
}

// Legendre-invariant metric g = f·(η ∂²M), symmetrized with η = diag(−1,1,…)
// and S in the first slot:
//   g_ab = ½ (η_a + η_b) f ∂²M/∂E^a∂E^b.
// Cross terms between S and every other coordinate carry weight 0 and vanish
// identically; the determinant therefore always factors as
//   det g = −f^n · M_SS · B,  B = M_QQ (n=2) or M_QQ·M_ll − M_Ql² (n=3),
// which is exactly the factor list recorded for the singularity search.
inline MetricField gtd_metric(const ThermoModel& model) {
    detail::require_metric_dim(model);
    const std::size_t n = model.vars.size();
    auto H = detail::hessian(model);

    GenPoly f = thermo_quantities(model).f;

    std::vector<std::vector<RationalExpr>> g(n, std::vector<RationalExpr>(n));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b) {
            const double eta_a = (a == 0) ? -1.0 : 1.0;
            const double eta_b = (b == 0) ? -1.0 : 1.0;
            const double w = 0.5 * (eta_a + eta_b);
            if (w == 0.0)
                g[a][b] = RationalExpr::zero();
            else
                g[a][b] = RationalExpr(GenPoly::constant(w) * f * H[a][b]);
            if (b != a) g[b][a] = g[a][b];
        }

    std::vector<LabeledFactor> factors;
    factors.push_back({"conformal_factor", f, static_cast<int>(n)});
    factors.push_back({"hess_SS", H[0][0], 1});
    if (n == 2) {
        factors.push_back({"block_det", H[1][1], 1});
    } else {
        factors.push_back({"block_det", H[1][1] * H[2][2] - H[1][2] * H[1][2], 1});
    }
    return MetricField(model.vars, std::move(g), std::move(factors));
}

}  // namespace geotherm
