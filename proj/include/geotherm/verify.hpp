#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "geotherm/analysis.hpp"
#include "geotherm/config.hpp"
#include "geotherm/metric.hpp"
#include "geotherm/models.hpp"

namespace geotherm {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

using CheckList = std::vector<CheckResult>;

namespace detail {

// Deterministic uniform doubles (std::uniform_real_distribution sequences are
// implementation-defined; raw mt19937 output is not).
class Uniform {
public:
    explicit Uniform(std::uint32_t seed) : rng_(seed) {}
    double in(double lo, double hi) {
        return lo + (hi - lo) * (rng_() * (1.0 / 4294967296.0));
    }

private:
    std::mt19937 rng_;
};

inline bool close_rel(double a, double b, double rel, double abs_floor = 1e-12) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

inline EvalPoint random_point(const ThermoModel& model, Uniform& u, double lo = 0.5,
                              double hi = 5.0) {
    EvalPoint p;
    for (const auto& v : model.vars) p.set(v, u.in(lo, hi));
    return p;
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace detail

// --- symbolic derivatives vs central finite differences --------------------

inline CheckResult check_fd_derivatives(const ThermoModel& model, std::uint32_t seed = 11) {
    detail::Uniform u(seed);
    const GenPoly& M = model.potential;
    std::vector<GenPoly> first;
    for (const auto& v : model.vars) first.push_back(M.diff(v));
    const bool has_s = model.has_var(kS);
    const RationalExpr cq = has_s ? thermo_quantities(model).C_Q : RationalExpr::zero();
    const RationalExpr dcq = has_s ? cq.diff(kS) : RationalExpr::zero();
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        EvalPoint p = detail::random_point(model, u);
        for (std::size_t vi = 0; vi < model.vars.size(); ++vi) {
            const VarId& v = model.vars[vi];
            const double x = p.at(v);
            const double h = 1e-5 * x;
            EvalPoint pp = p, pm = p;
            pp.set(v, x + h);
            pm.set(v, x - h);
            const double fd = (M.eval(pp) - M.eval(pm)) / (2.0 * h);
            const double sym = first[vi].eval(p);
            const double err = std::abs(sym - fd) / (std::max(std::abs(sym), std::abs(fd)) + 1e-12);
            worst = std::max(worst, err);
        }
        // quotient-rule path: d/dS of C_Q
        if (!has_s) continue;
        const double x = p.at(kS);
        const double h = 1e-5 * x;
        EvalPoint pp = p, pm = p;
        pp.set(kS, x + h);
        pm.set(kS, x - h);
        const double den_p = cq.den().eval(pp), den_m = cq.den().eval(pm), den_0 = cq.den().eval(p);
        if (std::abs(den_0) < 1e-6 || std::abs(den_p) < 1e-6 || std::abs(den_m) < 1e-6)
            continue;  // too close to a pole for a meaningful difference
        const double cq_0 = cq.eval(p);
        const double sym = dcq.eval(p);
        // FD loses (h/dist)^2 digits approaching a pole; |C_Q / C_Q'| estimates
        // the distance, so stay at least ~3000 step widths away.
        if (std::abs(cq_0) < 3000.0 * h * std::abs(sym)) continue;
        const double fd = (cq.eval(pp) - cq.eval(pm)) / (2.0 * h);
        const double err = std::abs(sym - fd) / (std::max(std::abs(sym), std::abs(fd)) + 1e-12);
        worst = std::max(worst, err);
    }
    return {"fd-derivatives", worst < 1e-6, "max rel err " + detail::fmt(worst)};
}

// --- symbolic curvature vs the nested-difference oracle --------------------

inline CheckResult check_curvature_oracle(const ThermoModel& model, std::uint32_t seed = 23) {
    detail::Uniform u(seed);
    ModelAnalysis an{ThermoModel{model}};
    const MetricField& g = an.metric(SingSource::R_gtd);
    const RationalExpr& R = an.scalar(SingSource::R_gtd);

    int tested = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 24 && tested < 10; ++trial) {
        EvalPoint p = detail::random_point(model, u, 0.8, 4.0);
        double oracle;
        try {
            oracle = curvature_numeric_oracle(g, p);
        } catch (const DegenerateMetric&) {
            continue;
        }
        const double sym = R.eval_unchecked(p);
        if (!std::isfinite(sym) || !std::isfinite(oracle)) continue;
        const double err = (std::abs(sym) < 1.0)
                               ? std::abs(sym - oracle)
                               : std::abs(sym - oracle) / std::abs(sym);
        // near-degenerate points lose oracle digits; only count well-conditioned ones
        if (std::abs(sym) > 1e6) continue;
        worst = std::max(worst, err);
        ++tested;
    }
    const bool ok = tested >= 8 && worst < 1e-4;
    return {"curvature-oracle", ok,
            "tested " + std::to_string(tested) + ", max err " + detail::fmt(worst)};
}

// --- RN closed-form heat capacity ------------------------------------------

inline CheckResult check_rn_closed_form(std::uint32_t seed = 37) {
    detail::Uniform u(seed);
    const double l = 8.0;
    ThermoModel rn = build_pmi_model(3, 1, l, false);
    RationalExpr cq = thermo_quantities(rn).C_Q;
    const double pi = std::numbers::pi;
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        const double S = u.in(1.0, 50.0);
        const double Q = u.in(0.2, 3.0);
        EvalPoint p{{kS, S}, {kQ, Q}};
        const double den = 3 * S * S - pi * S * l * l + 3 * pi * pi * Q * Q * l * l;
        if (std::abs(den) < 1.0) continue;  // skip the pole ring
        const double closed = 2 * S * (3 * S * S + pi * S * l * l - pi * pi * Q * Q * l * l) / den;
        const double built = cq.eval(p);
        worst = std::max(worst, std::abs(built - closed) /
                                    (std::max(std::abs(built), std::abs(closed)) + 1e-30));
    }
    return {"rn-closed-form-CQ", worst < 1e-10, "max rel err " + detail::fmt(worst)};
}

// --- structural cancellation of the S-row cross terms ----------------------

inline CheckResult check_gtd_cross_terms(const ThermoModel& model) {
    MetricField g = gtd_metric(model);
    bool ok = true;
    for (std::size_t j = 1; j < g.dim(); ++j)
        ok = ok && g.component(0, j).num().is_zero();
    return {"gtd-cross-term-cancellation", ok,
            ok ? "g_S,other structurally empty" : "nonzero S-row cross term"};
}

// Negative control: breaking the signature to η = diag(+1, +1, ...) must make
// the cancellation check fail. This check "passes" never — it exists so the
// negative-control suite demonstrably catches the corruption.
inline CheckResult check_wrong_eta_cross_terms(const ThermoModel& model) {
    auto H = detail::hessian(model);
    GenPoly f = thermo_quantities(model).f;
    const std::size_t n = model.vars.size();
    std::vector<std::vector<RationalExpr>> g(n, std::vector<RationalExpr>(n));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b) {
            g[a][b] = RationalExpr(f * H[a][b]);  // all weights +1: nothing cancels
            if (b != a) g[b][a] = g[a][b];
        }
    MetricField broken(model.vars, std::move(g));
    bool cancelled = true;
    for (std::size_t j = 1; j < broken.dim(); ++j)
        cancelled = cancelled && broken.component(0, j).num().is_zero();
    return {"gtd-cross-term-cancellation[wrong-eta]", cancelled,
            cancelled ? "unexpected cancellation" : "cross terms survive, as they must"};
}

// --- first-law closure along straight paths --------------------------------

inline CheckResult check_first_law(const ThermoModel& model, std::uint32_t seed = 41) {
    detail::Uniform u(seed);
    // duals I_a = ∂M/∂E^a — for {S,Q,l} these are exactly T, Φ_e, L
    std::vector<GenPoly> duals;
    for (const auto& v : model.vars) duals.push_back(model.potential.diff(v));
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        EvalPoint a = detail::random_point(model, u, 1.0, 3.0);
        std::vector<double> delta;
        for (const auto& v : model.vars) delta.push_back(a.at(v) * u.in(-0.3, 0.3));

        auto point_at = [&](double t) {
            EvalPoint p;
            for (std::size_t k = 0; k < model.vars.size(); ++k)
                p.set(model.vars[k], a.at(model.vars[k]) + t * delta[k]);
            return p;
        };
        auto integrand = [&](double t) {
            EvalPoint p = point_at(t);
            double sum = 0.0;
            for (std::size_t k = 0; k < duals.size(); ++k) sum += duals[k].eval(p) * delta[k];
            return sum;
        };

        // composite Simpson, 512 panels
        const int panels = 512;
        double integral = integrand(0.0) + integrand(1.0);
        for (int k = 1; k < panels; ++k)
            integral += integrand(double(k) / panels) * (k % 2 ? 4.0 : 2.0);
        integral /= 3.0 * panels;

        const double dM = model.potential.eval(point_at(1.0)) - model.potential.eval(point_at(0.0));
        worst = std::max(worst, std::abs(integral - dM) / std::max(1.0, std::abs(dM)));
    }
    return {"first-law-closure", worst < 1e-8, "max closure err " + detail::fmt(worst)};
}

// --- Ruppeiner conformal relation -------------------------------------------

inline CheckResult check_ruppeiner_proportionality(const ThermoModel& model,
                                                   std::uint32_t seed = 53) {
    detail::Uniform u(seed);
    MetricField w = weinhold_metric(model);
    MetricField r = ruppeiner_metric(model);
    GenPoly T = model.potential.diff(kS);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        EvalPoint p = detail::random_point(model, u);
        const double t = T.eval(p);
        for (std::size_t a = 0; a < w.dim(); ++a)
            for (std::size_t b = 0; b < w.dim(); ++b) {
                const double lhs = t * r.component(a, b).eval_unchecked(p);
                const double rhs = w.component(a, b).eval(p);
                worst = std::max(worst,
                                 std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
            }
    }
    return {"ruppeiner-proportionality", worst < 1e-10, "max err " + detail::fmt(worst)};
}

// --- intensive-variable positivity on the plotted window --------------------

inline CheckResult check_positivity(const ThermoModel& model, const SweepSpec& spec) {
    ThermoQuantities q = thermo_quantities(model);
    bool ok = true;
    for (double x : sweep_grid(spec)) {
        EvalPoint p = line_point(spec, x);
        if (!(q.T.eval(p) > 0.0)) ok = false;
        if (model.has_var(kQ) && !(q.Phi_e.eval(p) > 0.0)) ok = false;
    }
    return {"intensive-positivity", ok,
            ok ? "T and Phi_e > 0 on the window" : "non-positive value found"};
}

// --- coincidence verdict -----------------------------------------------------

struct CoincidenceExpectation {
    bool verdict = true;
    int min_transitions = 0;       // lower bound on phase_transition records (C_Q source)
    int exact_transitions = -1;    // -1: no exact requirement
    int min_degeneracies = 0;      // metric_degeneracy among R_gtd records
};

inline CheckResult check_coincidence(const ThermoModel& model, const SweepSpec& spec,
                                     const CoincidenceExpectation& expect,
                                     GtdSource source = GtdSource::gtd,
                                     const std::string& tag = "") {
    ModelAnalysis an(ThermoModel(model), source);
    Tolerances tol;
    TransitionReport report = coincidence_report(an, spec, tol);

    int transitions = 0, degeneracies = 0;
    for (const auto& rec : report.records) {
        if (rec.source == SingSource::C_Q && rec.kind == SingKind::phase_transition)
            ++transitions;
        if (rec.source == SingSource::R_gtd && rec.kind == SingKind::metric_degeneracy)
            ++degeneracies;
    }

    bool ok = report.verdict_pass == expect.verdict;
    if (expect.exact_transitions >= 0) ok = ok && transitions == expect.exact_transitions;
    ok = ok && transitions >= expect.min_transitions;
    ok = ok && degeneracies >= expect.min_degeneracies;

    std::string name = "coincidence-verdict" + tag;
    std::string detail = std::string("verdict ") + (report.verdict_pass ? "pass" : "fail") +
                         ", transitions " + std::to_string(transitions) + ", degeneracies " +
                         std::to_string(degeneracies);
    return {name, ok, detail};
}

// --- suites -----------------------------------------------------------------

inline std::vector<std::string> suite_names() {
    return {"rn", "pmi-3-5/2", "pmi-4-5/2", "pmi-6-5/2", "three-var", "negative-control", "all"};
}

namespace detail {

inline SweepSpec s_sweep(double lo, double hi, int points, std::map<VarId, double> fixed) {
    SweepSpec spec;
    spec.active = kS;
    spec.min = lo;
    spec.max = hi;
    spec.points = points;
    spec.fixed = std::move(fixed);
    return spec;
}

inline void append(CheckList& out, const CheckList& extra) {
    out.insert(out.end(), extra.begin(), extra.end());
}

inline CheckList basic_checks(const ThermoModel& model) {
    CheckList out;
    out.push_back(check_fd_derivatives(model));
    out.push_back(check_gtd_cross_terms(model));
    out.push_back(check_first_law(model));
    out.push_back(check_ruppeiner_proportionality(model));
    out.push_back(check_curvature_oracle(model));
    return out;
}

}  // namespace detail

inline CheckList run_suite(const std::string& id) {
    CheckList out;
    if (id == "rn") {
        ThermoModel rn8 = build_pmi_model(3, 1, 8.0, false);
        out = detail::basic_checks(rn8);
        out.push_back(check_rn_closed_form());
        CoincidenceExpectation two;
        two.exact_transitions = 2;
        out.push_back(check_coincidence(rn8, detail::s_sweep(5, 60, 600, {{kQ, 1.0}}), two,
                                        GtdSource::gtd, "[l=8]"));
        ThermoModel rn1 = build_pmi_model(3, 1, 1.0, false);
        CoincidenceExpectation none;
        none.exact_transitions = 0;
        out.push_back(check_coincidence(rn1, detail::s_sweep(1, 30, 400, {{kQ, 1.0}}), none,
                                        GtdSource::gtd, "[l=1]"));
        return out;
    }
    if (id == "pmi-3-5/2") {
        ThermoModel m = build_pmi_model(3, 4, 1.0, false);
        out = detail::basic_checks(m);
        CoincidenceExpectation e;
        e.min_transitions = 1;
        out.push_back(check_coincidence(m, detail::s_sweep(0.5, 10, 400, {{kQ, 1.0}}), e));
        return out;
    }
    if (id == "pmi-4-5/2") {
        ThermoModel m = build_pmi_model(4, 4, 1.0, false);
        out = detail::basic_checks(m);
        SweepSpec window = detail::s_sweep(0.5, 10, 400, {{kQ, 1.0}});
        out.push_back(check_positivity(m, window));
        CoincidenceExpectation e;
        e.min_transitions = 1;
        out.push_back(check_coincidence(m, window, e));
        return out;
    }
    if (id == "pmi-6-5/2") {
        ThermoModel m = build_pmi_model(6, 4, 1.0, false);
        out = detail::basic_checks(m);
        CoincidenceExpectation e;
        e.min_transitions = 1;
        e.min_degeneracies = 1;
        out.push_back(check_coincidence(m, detail::s_sweep(0.1, 10, 600, {{kQ, 1.0}}), e));
        return out;
    }
    if (id == "three-var") {
        ThermoModel m = build_pmi_model(4, 4, 1.0, true);
        out.push_back(check_fd_derivatives(m));
        out.push_back(check_gtd_cross_terms(m));
        out.push_back(check_first_law(m));
        SweepSpec spec;
        spec.active = kL;
        spec.min = 0.5;
        spec.max = 3.0;
        spec.points = 400;
        spec.fixed = {{kS, 10.0}, {kQ, 1.0}};
        CoincidenceExpectation e;
        e.min_transitions = 1;
        e.min_degeneracies = 1;
        out.push_back(check_coincidence(m, spec, e));
        return out;
    }
    if (id == "negative-control") {
        ThermoModel m = build_pmi_model(4, 4, 1.0, false);
        out.push_back(check_wrong_eta_cross_terms(m));
        CoincidenceExpectation expect_pass;  // the corrupted source cannot deliver it
        expect_pass.min_transitions = 1;
        out.push_back(check_coincidence(m, detail::s_sweep(1, 12, 600, {{kQ, 8.0}}), expect_pass,
                                        GtdSource::weinhold, "[weinhold-as-gtd]"));
        return out;
    }
    if (id == "all") {
        for (const char* sub : {"rn", "pmi-3-5/2", "pmi-4-5/2", "pmi-6-5/2", "three-var"})
            detail::append(out, run_suite(sub));
        return out;
    }
    throw InvalidParameter("unknown verify suite '" + id + "'");
}

// Generic checks against a configured model (used by `verify <config>`).
inline CheckList run_checks_for_config(const RunSpec& spec) {
    ThermoModel model = build_model(spec);
    CheckList out;
    out.push_back(check_fd_derivatives(model));
    out.push_back(check_first_law(model));
    if (model.vars.size() >= 2) {
        out.push_back(check_gtd_cross_terms(model));
        out.push_back(check_ruppeiner_proportionality(model));
        out.push_back(check_curvature_oracle(model));
        CoincidenceExpectation e;
        e.verdict = true;
        out.push_back(check_coincidence(model, spec.sweep, e, spec.gtd_source));
    }
    return out;
}

}  // namespace geotherm
