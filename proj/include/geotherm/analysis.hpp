#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "geotherm/error.hpp"
#include "geotherm/metric.hpp"
#include "geotherm/models.hpp"
#include "geotherm/poly.hpp"
#include "geotherm/rational_expr.hpp"

namespace geotherm {

// ---------------------------------------------------------------------------
// Sweep machinery
// ---------------------------------------------------------------------------

enum class Quantity { T, Phi, L, CQ, R_gtd, R_w, R_rupp, f };

inline const char* quantity_name(Quantity q) {
    switch (q) {
        case Quantity::T: return "T";
        case Quantity::Phi: return "Phi";
        case Quantity::L: return "L";
        case Quantity::CQ: return "CQ";
        case Quantity::R_gtd: return "R_gtd";
        case Quantity::R_w: return "R_w";
        case Quantity::R_rupp: return "R_rupp";
        case Quantity::f: return "f";
    }
    return "?";
}

inline std::optional<Quantity> quantity_from_name(const std::string& s) {
    for (Quantity q : {Quantity::T, Quantity::Phi, Quantity::L, Quantity::CQ, Quantity::R_gtd,
                       Quantity::R_w, Quantity::R_rupp, Quantity::f})
        if (s == quantity_name(q)) return q;
    return std::nullopt;
}

struct SweepSpec {
    VarId active{"S"};
    double min = 0.0;
    double max = 0.0;
    int points = 400;
    bool log_scale = false;
    std::map<VarId, double> fixed;  // values of the non-active coordinates
};

struct Tolerances {
    double match_rel = 1e-6;      // pole-location matching, relative in the active var
    double f_zero_rel = 1e-8;     // |f| below this × max|f| on the sweep = degeneracy
    double bisect_rel = 1e-10;    // bracket refinement
    double pole_guard_rel = 1e-6; // grid flagging threshold on denominator factors
    double growth_min = 0.5;      // minimum measured growth exponent for a real divergence
};

inline void validate_sweep(const ThermoModel& model, const SweepSpec& spec) {
    if (!(spec.min > 0.0)) throw DomainError("sweep range must stay strictly positive");
    if (!(spec.min < spec.max)) throw DomainError("sweep needs min < max");
    if (spec.points < 16) throw InvalidParameter("sweep needs at least 16 points");
    if (!model.has_var(spec.active))
        throw UnknownVariable(spec.active.name);
    for (const auto& v : model.vars) {
        if (v == spec.active) continue;
        auto it = spec.fixed.find(v);
        if (it == spec.fixed.end()) throw MissingVariable(v.name);
        if (!(it->second > 0.0)) throw DomainError("fixed coordinate " + v.name + " must be > 0");
    }
}

inline std::vector<double> sweep_grid(const SweepSpec& spec) {
    std::vector<double> x(spec.points);
    const int last = spec.points - 1;
    if (spec.log_scale) {
        const double la = std::log(spec.min), lb = std::log(spec.max);
        for (int j = 0; j <= last; ++j) x[j] = std::exp(la + (lb - la) * j / last);
    } else {
        for (int j = 0; j <= last; ++j) x[j] = spec.min + (spec.max - spec.min) * j / last;
    }
    x[0] = spec.min;
    x[last] = spec.max;
    return x;
}

inline EvalPoint line_point(const SweepSpec& spec, double x) {
    EvalPoint p;
    for (const auto& [v, val] : spec.fixed)
        if (!(v == spec.active)) p.set(v, val);
    p.set(spec.active, x);
    return p;
}

// Number of worker threads for grid evaluation: hardware concurrency, capped
// by the GEOTHERM_THREADS environment variable when set.
inline unsigned thread_budget() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("GEOTHERM_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) hw = std::min<long>(hw, v);
    }
    return hw;
}

// Index-partitioned parallel loop. The partition depends only on (count,
// workers), and every index writes its own slot, so results are identical for
// any thread count.
template <typename Fn>
inline void parallel_for(std::size_t count, Fn&& fn) {
    const std::size_t workers =
        std::min<std::size_t>(thread_budget(), std::max<std::size_t>(1, count / 64));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::mutex err_mutex;
    std::exception_ptr first_error;
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// Per-model cache of symbolic quantities, metrics, curvatures, and the
// denominator factors each singular quantity owes its poles to.
// ---------------------------------------------------------------------------

enum class SingSource { C_Q, R_gtd, R_w, R_rupp };

inline const char* source_name(SingSource s) {
    switch (s) {
        case SingSource::C_Q: return "C_Q";
        case SingSource::R_gtd: return "R_gtd";
        case SingSource::R_w: return "R_w";
        case SingSource::R_rupp: return "R_rupp";
    }
    return "?";
}

// Which metric family feeds the "GTD" slot of the analysis. The weinhold
/// setting exists as a deliberate negative control: it makes the coincidence
// verdict fail on models whose Weinhold singularities miss the C_Q poles.
enum class GtdSource { gtd, weinhold };

class ModelAnalysis {
public:
    explicit ModelAnalysis(ThermoModel model, GtdSource gtd_source = GtdSource::gtd)
        : model_(std::move(model)), gtd_source_(gtd_source) {
        quantities_ = thermo_quantities(model_);
    }

    const ThermoModel& model() const { return model_; }
    const ThermoQuantities& quantities() const { return quantities_; }
    GtdSource gtd_source() const { return gtd_source_; }

    const MetricField& metric(SingSource src) {
        switch (src) {
            case SingSource::R_gtd: {
                auto& slot = (gtd_source_ == GtdSource::gtd) ? gtd_ : wein_;
                if (!slot)
                    slot = (gtd_source_ == GtdSource::gtd) ? gtd_metric(model_)
                                                           : weinhold_metric(model_);
                return *slot;
            }
            case SingSource::R_w:
                if (!wein_) wein_ = weinhold_metric(model_);
                return *wein_;
            case SingSource::R_rupp:
                if (!rupp_) rupp_ = ruppeiner_metric(model_);
                return *rupp_;
            case SingSource::C_Q: break;
        }
        throw InvalidParameter("C_Q has no metric");
    }

    // The divergent quantity for a source: C_Q itself, or a curvature scalar.
    const RationalExpr& scalar(SingSource src) {
        if (src == SingSource::C_Q) return quantities_.C_Q;
        auto& slot = scalar_cache_[static_cast<int>(src)];
        if (!slot) slot = curvature_scalar(metric(src));
        return *slot;
    }

    // Denominator factors whose zero sets carry the poles of scalar(src).
    const std::vector<LabeledFactor>& factors(SingSource src) {
        if (src == SingSource::C_Q) {
            if (!cq_factors_) {
                cq_factors_ = std::vector<LabeledFactor>{
                    {"CQ_den", quantities_.C_Q.den(), 1}};
            }
            return *cq_factors_;
        }
        return metric(src).det_factors();
    }

private:
    ThermoModel model_;
    GtdSource gtd_source_;
    ThermoQuantities quantities_;
    std::optional<MetricField> gtd_, wein_, rupp_;
    std::optional<RationalExpr> scalar_cache_[4];
    std::optional<std::vector<LabeledFactor>> cq_factors_;
};

// ---------------------------------------------------------------------------
// Grid sweeps
// ---------------------------------------------------------------------------

struct SweepTable {
    std::vector<double> x;
    std::map<Quantity, std::vector<double>> values;
    std::vector<std::string> pole_flags;  // per point; ';'-joined quantity names
};

namespace detail {

inline bool quantity_available(const ThermoModel& m, Quantity q) {
    switch (q) {
        case Quantity::L: return m.has_var(kL);
        case Quantity::Phi: return m.has_var(kQ);
        default: return true;
    }
}

// Quantities whose value can blow up, mapped to the factors responsible.
inline std::optional<SingSource> source_of_quantity(Quantity q) {
    switch (q) {
        case Quantity::CQ: return SingSource::C_Q;
        case Quantity::R_gtd: return SingSource::R_gtd;
        case Quantity::R_w: return SingSource::R_w;
        case Quantity::R_rupp: return SingSource::R_rupp;
        default: return std::nullopt;
    }
}

}  // namespace detail

inline SweepTable sweep_table(ModelAnalysis& an, const std::vector<Quantity>& quantities,
                              const SweepSpec& spec, const Tolerances& tol = {}) {
    validate_sweep(an.model(), spec);
    SweepTable table;
    table.x = sweep_grid(spec);
    const std::size_t N = table.x.size();
    table.pole_flags.assign(N, "");

    std::vector<EvalPoint> pts;
    pts.reserve(N);
    for (double x : table.x) pts.push_back(line_point(spec, x));

    for (Quantity q : quantities) {
        if (!detail::quantity_available(an.model(), q)) continue;
        std::vector<double>& col = table.values[q];
        col.assign(N, 0.0);
        const ThermoQuantities& tq = an.quantities();
        switch (q) {
            case Quantity::T:
                parallel_for(N, [&](std::size_t j) { col[j] = tq.T.eval(pts[j]); });
                break;
            case Quantity::Phi:
                parallel_for(N, [&](std::size_t j) { col[j] = tq.Phi_e.eval(pts[j]); });
                break;
            case Quantity::L:
                parallel_for(N, [&](std::size_t j) { col[j] = tq.L->eval(pts[j]); });
                break;
            case Quantity::f:
                parallel_for(N, [&](std::size_t j) { col[j] = tq.f.eval(pts[j]); });
                break;
            default: {
                const RationalExpr& expr = an.scalar(*detail::source_of_quantity(q));
                parallel_for(N, [&](std::size_t j) { col[j] = expr.eval_unchecked(pts[j]); });
                break;
            }
        }
    }

    // Pole flagging: a grid point is flagged for a quantity when one of its
    // denominator factors either dips below the guard threshold or changes
    // sign across an adjacent interval. Values are left as evaluated.
    for (Quantity q : quantities) {
        auto src = detail::source_of_quantity(q);
        if (!src || !detail::quantity_available(an.model(), q)) continue;
        std::vector<bool> flagged(N, false);
        for (const auto& factor : an.factors(*src)) {
            std::vector<double> v(N);
            for (std::size_t j = 0; j < N; ++j) v[j] = factor.poly.eval(pts[j]);
            double scale = 0.0;
            for (double t : v) scale = std::max(scale, std::abs(t));
            if (scale == 0.0) continue;
            for (std::size_t j = 0; j < N; ++j) {
                bool dip = std::abs(v[j]) < tol.pole_guard_rel * scale;
                bool change_left = j > 0 && std::signbit(v[j - 1]) != std::signbit(v[j]);
                bool change_right = j + 1 < N && std::signbit(v[j]) != std::signbit(v[j + 1]);
                if (dip || change_left || change_right) flagged[j] = true;
            }
        }
        for (std::size_t j = 0; j < N; ++j)
            if (flagged[j]) {
                if (!table.pole_flags[j].empty()) table.pole_flags[j] += ";";
                table.pole_flags[j] += quantity_name(q);
            }
    }
    return table;
}

inline std::vector<std::pair<double, double>> sweep(ModelAnalysis& an, Quantity q,
                                                    const SweepSpec& spec,
                                                    const Tolerances& tol = {}) {
    SweepTable t = sweep_table(an, {q}, spec, tol);
    std::vector<std::pair<double, double>> out;
    auto it = t.values.find(q);
    if (it == t.values.end()) return out;
    out.reserve(t.x.size());
    for (std::size_t j = 0; j < t.x.size(); ++j) out.emplace_back(t.x[j], it->second[j]);
    return out;
}

// ---------------------------------------------------------------------------
// Pole finding and classification
// ---------------------------------------------------------------------------

enum class SingKind { phase_transition, metric_degeneracy, unclassified };

inline const char* kind_name(SingKind k) {
    switch (k) {
        case SingKind::phase_transition: return "phase_transition";
        case SingKind::metric_degeneracy: return "metric_degeneracy";
        case SingKind::unclassified: return "unclassified";
    }
    return "?";
}

struct SingularityRecord {
    double location = 0.0;
    SingSource source = SingSource::C_Q;
    SingKind kind = SingKind::unclassified;
    std::vector<std::string> factor_labels;  // all responsible factors
    double bracket_lo = 0.0, bracket_hi = 0.0;
    double residual = 0.0;          // |factor| at the refined root
    double f_value = 0.0;           // |f| at the location
    double f_scale = 0.0;           // max |f| on the sweep
    double growth_exponent = 0.0;   // measured d log|scalar| / d log(1/δ)
};

namespace detail {

// Bisection to relative width tol on a sign-change bracket of p (restricted
// to one variable already).
inline double bisect(const GenPoly& p, const VarId& v, double lo, double hi, double lo_val,
                     double tol_rel) {
    auto value = [&](double x) {
        EvalPoint pt;
        pt.set(v, x);
        return p.eval(pt);
    };
    for (int iter = 0; iter < 200 && (hi - lo) > tol_rel * hi; ++iter) {
        double mid = 0.5 * (lo + hi);
        double vm = value(mid);
        if (vm == 0.0) return mid;
        if (std::signbit(vm) == std::signbit(lo_val)) {
            lo = mid;
            lo_val = vm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct RawRoot {
    double x, lo, hi, residual;
    std::string label;
};

}  // namespace detail

// Scan each factor on the sweep grid for sign changes; refine by bisection;
// merge roots that agree within match tolerance across factors (a merged
// record lists every responsible factor).
inline std::vector<SingularityRecord> find_poles(const std::vector<LabeledFactor>& factors,
                                                 const SweepSpec& spec, const Tolerances& tol,
                                                 SingSource source) {
    const std::vector<double> grid = sweep_grid(spec);
    std::vector<detail::RawRoot> raw;

    for (const auto& factor : factors) {
        std::map<VarId, double> fixed;
        for (const auto& [v, val] : spec.fixed)
            if (!(v == spec.active)) fixed[v] = val;
        GenPoly line = factor.poly.substitute(fixed);
        if (line.is_zero()) continue;

        std::vector<double> v(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j) {
            EvalPoint pt;
            pt.set(spec.active, grid[j]);
            v[j] = line.eval(pt);
        }
        for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
            if (v[j] == 0.0) {
                raw.push_back({grid[j], grid[j], grid[j], 0.0, factor.label});
                continue;
            }
            if (std::signbit(v[j]) == std::signbit(v[j + 1]) || v[j + 1] == 0.0) continue;
            double root =
                detail::bisect(line, spec.active, grid[j], grid[j + 1], v[j], tol.bisect_rel);
            EvalPoint pt;
            pt.set(spec.active, root);
            raw.push_back({root, grid[j], grid[j + 1], std::abs(line.eval(pt)), factor.label});
        }
    }

    std::sort(raw.begin(), raw.end(),
              [](const detail::RawRoot& a, const detail::RawRoot& b) { return a.x < b.x; });

    std::vector<SingularityRecord> out;
    for (const auto& r : raw) {
        if (!out.empty() &&
            std::abs(r.x - out.back().location) <= tol.match_rel * std::abs(out.back().location)) {
            SingularityRecord& rec = out.back();
            if (std::find(rec.factor_labels.begin(), rec.factor_labels.end(), r.label) ==
                rec.factor_labels.end())
                rec.factor_labels.push_back(r.label);
            rec.residual = std::min(rec.residual, r.residual);
            continue;
        }
        SingularityRecord rec;
        rec.location = r.x;
        rec.source = source;
        rec.factor_labels = {r.label};
        rec.bracket_lo = r.lo;
        rec.bracket_hi = r.hi;
        rec.residual = r.residual;
        out.push_back(std::move(rec));
    }
    return out;
}

namespace detail {

// Growth exponent of |expr| on the approach sequence x*(1 ± δ), δ = 1e−2,
// 1e−3, 1e−4: the largest decade-over-decade slope of log|expr|. A genuine
// pole of order p measures ≈ p; a removable point measures ≈ 0. Saturates at
// 999 when the expression overflows to inf on the sequence.
inline double growth_exponent(const RationalExpr& expr, const SweepSpec& spec, double x_star) {
    const double deltas[3] = {1e-2, 1e-3, 1e-4};
    double mag[3];
    for (int k = 0; k < 3; ++k) {
        double lo = expr.eval_unchecked(line_point(spec, x_star * (1.0 - deltas[k])));
        double hi = expr.eval_unchecked(line_point(spec, x_star * (1.0 + deltas[k])));
        double m = std::max(std::abs(lo), std::abs(hi));
        if (!std::isfinite(m)) return 999.0;
        mag[k] = m;
    }
    double best = 0.0;
    for (int k = 0; k < 2; ++k) {
        if (mag[k] <= 0.0 || mag[k + 1] <= 0.0) continue;
        best = std::max(best, std::log10(mag[k + 1] / mag[k]));
    }
    return best;
}

}  // namespace detail

// Fill in kind and evidence for one record found by find_poles.
//
// Order of tests:
//   1. |f| below tolerance there → metric_degeneracy. This is an exact
//      criterion (det g carries a power of f), so it applies whether or not
//      the scalar happens to blow up fast, and it wins ties: a degenerate
//      point is never promoted to a transition.
//   2. otherwise the quantity must actually diverge toward the location
//      (growth exponent at least tol.growth_min) — else unclassified;
//   3. the heat-capacity denominator vanishing there (its own factor among
//      the responsible ones, or a C_Q pole within match tolerance) →
//      phase_transition;
//   4. otherwise unclassified.
inline void classify_singularity(ModelAnalysis& an, SingularityRecord& rec,
                                 const SweepSpec& spec, const Tolerances& tol,
                                 const std::vector<double>& cq_poles) {
    const GenPoly& f = an.quantities().f;
    double f_scale = 0.0;
    for (double x : sweep_grid(spec)) f_scale = std::max(f_scale, std::abs(f.eval(line_point(spec, x))));
    rec.f_scale = f_scale;
    rec.f_value = std::abs(f.eval(line_point(spec, rec.location)));
    rec.growth_exponent = detail::growth_exponent(an.scalar(rec.source), spec, rec.location);

    const bool f_zero = rec.f_value < tol.f_zero_rel * f_scale;
    if (rec.source != SingSource::C_Q && f_zero) {
        rec.kind = SingKind::metric_degeneracy;
        return;
    }

    if (rec.growth_exponent < tol.growth_min) {
        rec.kind = SingKind::unclassified;
        return;
    }

    bool cq_den_here = false;
    for (const auto& label : rec.factor_labels)
        if (label == "hess_SS" || label == "CQ_den") cq_den_here = true;
    for (double p : cq_poles)
        if (std::abs(p - rec.location) <= tol.match_rel * std::abs(p)) cq_den_here = true;

    rec.kind = cq_den_here ? SingKind::phase_transition : SingKind::unclassified;
}

// ---------------------------------------------------------------------------
// Coincidence report: the operational form of the thesis under test — GTD
// curvature singularities, after discarding f = 0 degeneracies, sit exactly
// at the heat-capacity poles; Weinhold's do not.
// ---------------------------------------------------------------------------

struct MatchPair {
    double cq_pole = 0.0;
    double r_location = std::numeric_limits<double>::quiet_NaN();
    double rel_distance = std::numeric_limits<double>::quiet_NaN();
    bool matched = false;
};

struct TransitionReport {
    std::string model_name;
    std::vector<SingularityRecord> records;     // C_Q, R_gtd, and R_w records
    std::vector<MatchPair> matching;            // one per divergent C_Q pole
    std::vector<double> unmatched_physical_r;   // R_gtd divergences with no C_Q partner
    bool verdict_pass = false;
};

// A record counts as a physical GTD singularity if the curvature genuinely
// diverges there and the point is not an f = 0 degeneracy.
inline bool is_physical(const SingularityRecord& rec, const Tolerances& tol) {
    return rec.growth_exponent >= tol.growth_min && rec.kind != SingKind::metric_degeneracy;
}

inline TransitionReport coincidence_report(ModelAnalysis& an, const SweepSpec& spec,
                                           const Tolerances& tol = {}) {
    validate_sweep(an.model(), spec);
    TransitionReport report;
    report.model_name = an.model().name;

    auto cq_records = find_poles(an.factors(SingSource::C_Q), spec, tol, SingSource::C_Q);
    auto r_records = find_poles(an.factors(SingSource::R_gtd), spec, tol, SingSource::R_gtd);
    std::vector<SingularityRecord> w_records;
    if (an.gtd_source() == GtdSource::gtd)
        w_records = find_poles(an.factors(SingSource::R_w), spec, tol, SingSource::R_w);

    std::vector<double> cq_locations;
    for (auto& rec : cq_records) {
        classify_singularity(an, rec, spec, tol, {});
        if (rec.growth_exponent >= tol.growth_min) cq_locations.push_back(rec.location);
    }
    for (auto& rec : r_records) classify_singularity(an, rec, spec, tol, cq_locations);
    for (auto& rec : w_records) classify_singularity(an, rec, spec, tol, cq_locations);

    std::vector<bool> r_used(r_records.size(), false);
    for (double pole : cq_locations) {
        MatchPair pair;
        pair.cq_pole = pole;
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_idx = r_records.size();
        for (std::size_t k = 0; k < r_records.size(); ++k) {
            if (!is_physical(r_records[k], tol)) continue;
            double d = std::abs(r_records[k].location - pole) / std::abs(pole);
            if (d < best) {
                best = d;
                best_idx = k;
            }
        }
        if (best_idx < r_records.size() && best <= tol.match_rel) {
            pair.matched = true;
            pair.r_location = r_records[best_idx].location;
            pair.rel_distance = best;
            r_used[best_idx] = true;
        }
        report.matching.push_back(pair);
    }

    for (std::size_t k = 0; k < r_records.size(); ++k) {
        if (!is_physical(r_records[k], tol) || r_used[k]) continue;
        // A physical R singularity with no pre-assigned partner may still sit
        // on a C_Q pole (two factors can produce separate merged records).
        bool near_cq = false;
        for (double pole : cq_locations)
            if (std::abs(r_records[k].location - pole) <= tol.match_rel * std::abs(pole))
                near_cq = true;
        if (!near_cq) report.unmatched_physical_r.push_back(r_records[k].location);
    }

    bool all_matched = true;
    for (const auto& pair : report.matching) all_matched = all_matched && pair.matched;
    report.verdict_pass = all_matched && report.unmatched_physical_r.empty();

    report.records = std::move(cq_records);
    report.records.insert(report.records.end(), r_records.begin(), r_records.end());
    report.records.insert(report.records.end(), w_records.begin(), w_records.end());
    return report;
}

}  // namespace geotherm
