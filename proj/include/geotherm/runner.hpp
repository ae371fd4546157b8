#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geotherm/analysis.hpp"
#include "geotherm/config.hpp"
#include "geotherm/error.hpp"
#include "geotherm/models.hpp"
#include "geotherm/verify.hpp"
#include "geotherm/version.hpp"

namespace geotherm {

// Exit codes shared by the library runner and the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumeric = 2;
inline constexpr int kExitVerdict = 3;

namespace detail {

// Fixed 17-significant-digit scientific notation, locale-independent.
inline std::string fmt_sci(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 16);
    return std::string(buf, ptr);
}

inline std::string iso8601_now() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

inline const std::vector<Quantity>& csv_columns() {
    static const std::vector<Quantity> cols{Quantity::T,     Quantity::Phi,  Quantity::L,
                                            Quantity::CQ,    Quantity::R_gtd, Quantity::R_w,
                                            Quantity::R_rupp, Quantity::f};
    return cols;
}

inline std::string render_csv(const SweepTable& table) {
    std::string out = "x";
    for (Quantity q : csv_columns()) {
        out += ",";
        out += quantity_name(q);
    }
    out += ",pole_flags\n";
    for (std::size_t j = 0; j < table.x.size(); ++j) {
        out += fmt_sci(table.x[j]);
        for (Quantity q : csv_columns()) {
            out += ",";
            auto it = table.values.find(q);
            if (it != table.values.end()) out += fmt_sci(it->second[j]);
        }
        out += ",";
        out += table.pole_flags[j];
        out += "\n";
    }
    return out;
}

inline nlohmann::ordered_json record_json(const SingularityRecord& rec) {
    nlohmann::ordered_json evidence;
    evidence["factors"] = rec.factor_labels;
    evidence["bracket"] = {rec.bracket_lo, rec.bracket_hi};
    evidence["residual"] = rec.residual;
    evidence["f_value"] = rec.f_value;
    evidence["f_scale"] = rec.f_scale;
    evidence["growth_exponent"] = rec.growth_exponent;
    nlohmann::ordered_json j;
    j["location"] = rec.location;
    j["source"] = source_name(rec.source);
    j["kind"] = kind_name(rec.kind);
    j["evidence"] = evidence;
    return j;
}

inline nlohmann::ordered_json report_json(const TransitionReport& report,
                                          const SweepSpec& spec) {
    nlohmann::ordered_json sweep;
    sweep["var"] = spec.active.name;
    sweep["min"] = spec.min;
    sweep["max"] = spec.max;
    sweep["points"] = spec.points;
    sweep["scale"] = spec.log_scale ? "log" : "linear";
    nlohmann::ordered_json fixed;
    for (const auto& [v, val] : spec.fixed) fixed[v.name] = val;
    sweep["fixed"] = fixed;

    nlohmann::ordered_json j;
    j["model"] = report.model_name;
    j["sweep"] = sweep;
    j["records"] = nlohmann::ordered_json::array();
    for (const auto& rec : report.records) j["records"].push_back(record_json(rec));
    j["matching"] = nlohmann::ordered_json::array();
    for (const auto& pair : report.matching) {
        nlohmann::ordered_json m;
        m["cq_pole"] = pair.cq_pole;
        if (pair.matched) {
            m["r_location"] = pair.r_location;
            m["rel_distance"] = pair.rel_distance;
        } else {
            m["r_location"] = nullptr;
            m["rel_distance"] = nullptr;
        }
        m["matched"] = pair.matched;
        j["matching"].push_back(m);
    }
    j["unmatched_physical_r"] = report.unmatched_physical_r;
    j["verdict"] = report.verdict_pass ? "pass" : "fail";
    return j;
}

inline nlohmann::ordered_json spec_json(const RunSpec& spec) {
    nlohmann::ordered_json model;
    model["type"] = spec.model_type;
    if (spec.model_type == "custom") {
        model["vars"] = spec.custom_vars;
        model["potential"] = spec.potential_text;
    } else {
        model["n"] = spec.n;
        model["i"] = spec.i;
        model["l"] = spec.l;
        model["l_is_variable"] = spec.l_is_variable;
    }
    nlohmann::ordered_json sweep;
    sweep["var"] = spec.sweep.active.name;
    sweep["min"] = spec.sweep.min;
    sweep["max"] = spec.sweep.max;
    sweep["points"] = spec.sweep.points;
    sweep["scale"] = spec.sweep.log_scale ? "log" : "linear";
    nlohmann::ordered_json fixed;
    for (const auto& [v, val] : spec.sweep.fixed) fixed[v.name] = val;
    sweep["fixed"] = fixed;

    nlohmann::ordered_json tol;
    tol["match_rel"] = spec.tol.match_rel;
    tol["f_zero_rel"] = spec.tol.f_zero_rel;
    tol["bisect_rel"] = spec.tol.bisect_rel;
    tol["pole_guard_rel"] = spec.tol.pole_guard_rel;
    tol["growth_min"] = spec.tol.growth_min;

    nlohmann::ordered_json j;
    j["name"] = spec.name;
    j["model"] = model;
    j["sweep"] = sweep;
    j["tolerance"] = tol;
    j["gtd_source"] = spec.gtd_source == GtdSource::gtd ? "gtd" : "weinhold";
    j["verify_coincidence"] = spec.enforce_coincidence;
    j["output_dir"] = spec.output_dir;
    return j;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out.good()) throw Error("short write to " + path.string());
}

}  // namespace detail

// Named presets reproducing the figure configurations as data runs.
struct Preset {
    std::string name;
    std::string description;
    std::string config;
};

inline const std::vector<Preset>& presets() {
    static const std::vector<Preset> list = {
        {"fig1", "heat capacity vs entropy, n=4 i=4 l=1 Q=1",
         "model.type = pmi\nmodel.n = 4\nmodel.i = 4\nmodel.l = 1\n"
         "sweep.var = S\nsweep.min = 0.5\nsweep.max = 10\nsweep.points = 400\n"
         "sweep.fixed.Q = 1\nquantities = T,Phi,CQ,f\noutput.dir = out/fig1\n"},
        {"fig4", "GTD curvature vs entropy, n=4 i=4 l=1 Q=1",
         "model.type = pmi\nmodel.n = 4\nmodel.i = 4\nmodel.l = 1\n"
         "sweep.var = S\nsweep.min = 0.5\nsweep.max = 10\nsweep.points = 400\n"
         "sweep.fixed.Q = 1\nquantities = CQ,R_gtd,f\noutput.dir = out/fig4\n"},
        {"fig7", "GTD curvature and heat capacity, Maxwell case n=3 i=1 l=8 Q=1",
         "model.type = rn\nmodel.l = 8\n"
         "sweep.var = S\nsweep.min = 5\nsweep.max = 60\nsweep.points = 600\n"
         "sweep.fixed.Q = 1\nquantities = T,Phi,CQ,R_gtd,R_w,R_rupp,f\noutput.dir = out/fig7\n"},
        {"fig9", "Weinhold curvature vs heat capacity, n=4 i=4 l=1 Q=8",
         "model.type = pmi\nmodel.n = 4\nmodel.i = 4\nmodel.l = 1\n"
         "sweep.var = S\nsweep.min = 1\nsweep.max = 12\nsweep.points = 600\n"
         "sweep.fixed.Q = 8\nquantities = CQ,R_w,f\noutput.dir = out/fig9\n"},
        {"fig10", "heat capacity vs AdS radius, three-coordinate mode, S=10 Q=1",
         "model.type = pmi\nmodel.n = 4\nmodel.i = 4\nmodel.l = 1\nmodel.l_is_variable = true\n"
         "sweep.var = l\nsweep.min = 0.5\nsweep.max = 3\nsweep.points = 400\n"
         "sweep.fixed.S = 10\nsweep.fixed.Q = 1\nquantities = T,Phi,L,CQ,f\n"
         "output.dir = out/fig10\n"},
        {"fig12", "GTD curvature vs AdS radius, three-coordinate mode, S=10 Q=1",
         "model.type = pmi\nmodel.n = 4\nmodel.i = 4\nmodel.l = 1\nmodel.l_is_variable = true\n"
         "sweep.var = l\nsweep.min = 0.5\nsweep.max = 3\nsweep.points = 400\n"
         "sweep.fixed.S = 10\nsweep.fixed.Q = 1\nquantities = CQ,R_gtd,f\n"
         "output.dir = out/fig12\n"},
    };
    return list;
}

inline const Preset* find_preset(const std::string& name) {
    for (const auto& p : presets())
        if (p.name == name) return &p;
    return nullptr;
}

// Execute one run: sweep, report, and the three files. Returns an exit code.
// All computation happens before the first byte is written.
inline int run(const RunSpec& spec, std::ostream& log) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string csv_text;
    nlohmann::ordered_json report_doc;
    bool verdict_pass = true;
    try {
        ThermoModel model = build_model(spec);
        ModelAnalysis an(std::move(model), spec.gtd_source);
        std::vector<Quantity> quantities =
            spec.quantities.empty() ? default_quantities(an.model()) : spec.quantities;

        SweepTable table = sweep_table(an, quantities, spec.sweep, spec.tol);
        TransitionReport report = coincidence_report(an, spec.sweep, spec.tol);
        verdict_pass = report.verdict_pass;

        csv_text = detail::render_csv(table);
        report_doc = detail::report_json(report, spec.sweep);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InvalidParameter& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const UnknownVariable& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SyntaxError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        log << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }
    const auto t1 = std::chrono::steady_clock::now();

    namespace fs = std::filesystem;
    const fs::path dir(spec.output_dir);
    try {
        fs::create_directories(dir);
        detail::write_file(dir / "sweep.csv", csv_text);
        detail::write_file(dir / "report.json", report_doc.dump(2) + "\n");

        nlohmann::ordered_json manifest;
        manifest["tool"] = "geotherm";
        manifest["version"] = kVersion;
        manifest["generated_at"] = detail::iso8601_now();
        manifest["wall_time_seconds"] =
            std::chrono::duration<double>(t1 - t0).count();
        manifest["spec"] = detail::spec_json(spec);
        manifest["config_text"] = spec.source_text;
        manifest["outputs"] = {{"csv", "sweep.csv"}, {"report", "report.json"}};
        detail::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    } catch (const Error& e) {
        log << "write failure: " << e.what() << "\n";
        return kExitNumeric;
    }

    log << "wrote " << (dir / "sweep.csv").string() << ", report.json, manifest.json\n";
    log << "verdict: " << (verdict_pass ? "pass" : "fail") << "\n";
    if (spec.enforce_coincidence && !verdict_pass) return kExitVerdict;
    return kExitOk;
}

// Print the model's symbolic content in the expression grammar.
inline int show_model(const RunSpec& spec, std::ostream& out) {
    try {
        ThermoModel model = build_model(spec);
        ThermoQuantities q = thermo_quantities(model);
        out << "model: " << model.name << "\n";
        out << "vars:  ";
        for (std::size_t k = 0; k < model.vars.size(); ++k)
            out << (k ? ", " : "") << model.vars[k].name;
        out << "\n";
        out << "M    = " << display(model.potential) << "\n";
        out << "T    = " << display(q.T) << "\n";
        if (model.has_var(kQ)) out << "Phi  = " << display(q.Phi_e) << "\n";
        if (q.L) out << "L    = " << display(*q.L) << "\n";
        out << "C_Q  = (" << display(q.C_Q.num()) << ") / (" << display(q.C_Q.den()) << ")\n";
        out << "f    = " << display(q.f) << "\n";
        return kExitOk;
    } catch (const ConfigError& e) {
        out << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InvalidParameter& e) {
        out << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        out << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }
}

// Run a verification suite or the generic checks for a config; print a
// pass/fail table.
inline int run_verify(const CheckList& checks, std::ostream& out) {
    bool all = true;
    std::size_t width = 0;
    for (const auto& c : checks) width = std::max(width, c.name.size());
    for (const auto& c : checks) {
        all = all && c.pass;
        out << (c.pass ? "[PASS] " : "[FAIL] ") << c.name;
        for (std::size_t k = c.name.size(); k < width + 2; ++k) out << ' ';
        out << c.detail << "\n";
    }
    out << (all ? "all checks passed" : "CHECKS FAILED") << " (" << checks.size() << " run)\n";
    return all ? kExitOk : kExitVerdict;
}

}  // namespace geotherm
