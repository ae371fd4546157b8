#pragma once

#include <charconv>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "geotherm/analysis.hpp"
#include "geotherm/error.hpp"
#include "geotherm/models.hpp"
#include "geotherm/parse.hpp"

namespace geotherm {

// Fully resolved run description. Produced by parse_config from the flat
// key-value format documented in the README:
//
//   # comment
//   model.type = pmi            # pmi | rn | custom
//   model.n = 4
//   model.i = 4                 # or model.s = 5/2
//   model.l = 1.0
//   model.l_is_variable = false
//   sweep.var = S
//   sweep.min = 0.5
//   sweep.max = 10
//   sweep.points = 400
//   sweep.scale = linear        # linear | log
//   sweep.fixed.Q = 1
//   quantities = T,Phi,CQ,R_gtd,f
//   output.dir = out
//   tolerance.match_rel = 1e-6
//   analysis.gtd_source = gtd   # gtd | weinhold (negative control)
//   verify.coincidence = true
//
// Unknown keys are errors; every module precondition is checked here so a bad
// spec never reaches the computation stage.
struct RunSpec {
    std::string model_type;  // pmi | rn | custom
    int n = 3;
    int i = 1;
    double l = 1.0;
    bool l_is_variable = false;
    std::vector<std::string> custom_vars;
    std::string potential_text;

    SweepSpec sweep;
    std::vector<Quantity> quantities;  // empty = default set for the model
    std::string output_dir = "out";
    Tolerances tol;
    GtdSource gtd_source = GtdSource::gtd;
    bool enforce_coincidence = true;

    std::string name = "run";   // preset name or config file stem
    std::string source_text;    // raw config text, echoed into the manifest
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t comma = s.find(',', start);
        std::string item =
            trim(comma == std::string::npos ? s.substr(start) : s.substr(start, comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

inline double config_double(const std::string& key, const std::string& value) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw ConfigError(key, "expected a number, got '" + value + "'");
    return v;
}

inline long long config_int(const std::string& key, const std::string& value) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw ConfigError(key, "expected an integer, got '" + value + "'");
    return v;
}

inline bool config_bool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ConfigError(key, "expected true or false, got '" + value + "'");
}

}  // namespace detail

inline RunSpec parse_config(const std::string& text, const std::string& name = "run") {
    RunSpec spec;
    spec.name = name;
    spec.source_text = text;

    std::map<std::string, std::string> kv;
    std::vector<std::string> order;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string line =
            nl == std::string::npos ? text.substr(pos) : text.substr(pos, nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no), "expected key = value");
        std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no), "empty key");
        if (kv.count(key)) throw ConfigError(key, "duplicate key");
        kv[key] = value;
        order.push_back(key);
    }

    std::set<std::string> consumed;
    auto take = [&](const std::string& key) -> const std::string* {
        auto it = kv.find(key);
        if (it == kv.end()) return nullptr;
        consumed.insert(key);
        return &it->second;
    };
    auto require = [&](const std::string& key) -> const std::string& {
        const std::string* v = take(key);
        if (!v) throw ConfigError(key, "missing required key");
        return *v;
    };

    // --- model section ---
    spec.model_type = require("model.type");
    if (spec.model_type != "pmi" && spec.model_type != "rn" && spec.model_type != "custom")
        throw ConfigError("model.type", "must be pmi, rn, or custom");

    if (spec.model_type == "rn") {
        spec.n = 3;
        spec.i = 1;
    }
    if (spec.model_type == "pmi" || spec.model_type == "rn") {
        if (const std::string* v = take("model.n")) {
            long long n = detail::config_int("model.n", *v);
            if (spec.model_type == "rn" && n != 3)
                throw ConfigError("model.n", "rn fixes n = 3");
            spec.n = static_cast<int>(n);
        } else if (spec.model_type == "pmi") {
            throw ConfigError("model.n", "missing required key");
        }

        bool have_i = false;
        if (const std::string* v = take("model.i")) {
            spec.i = static_cast<int>(detail::config_int("model.i", *v));
            have_i = true;
        }
        if (const std::string* v = take("model.s")) {
            // s = (i+1)/2: accept "3", "5/2", ...
            std::string s = *v;
            std::size_t slash = s.find('/');
            long long i_from_s = 0;
            if (slash == std::string::npos) {
                i_from_s = 2 * detail::config_int("model.s", s) - 1;
            } else {
                long long num = detail::config_int("model.s", detail::trim(s.substr(0, slash)));
                long long den = detail::config_int("model.s", detail::trim(s.substr(slash + 1)));
                if (den == 2 && num % 2 == 1)
                    i_from_s = num - 1;
                else if (den == 1)
                    i_from_s = 2 * num - 1;
                else
                    throw ConfigError("model.s", "s must be a half-integer (2s-1 a positive integer)");
            }
            if (have_i && i_from_s != spec.i)
                throw ConfigError("model.s", "inconsistent with model.i");
            spec.i = static_cast<int>(i_from_s);
            have_i = true;
        }
        if (spec.model_type == "pmi" && !have_i)
            throw ConfigError("model.i", "missing required key (or give model.s)");

        if (spec.n < 3) throw ConfigError("model.n", "n must be an integer >= 3");
        if (spec.i < 1) throw ConfigError("model.i", "2s-1 must be a positive integer");
        if (spec.n == spec.i + 1)
            throw ConfigError("model.n", "n = i+1 (i.e. n = 2s) is excluded: the charge term degenerates");

        if (const std::string* v = take("model.l")) {
            spec.l = detail::config_double("model.l", *v);
            if (!(spec.l > 0.0)) throw ConfigError("model.l", "l must be > 0");
        }
        if (const std::string* v = take("model.l_is_variable"))
            spec.l_is_variable = detail::config_bool("model.l_is_variable", *v);
    } else {
        const std::string& vars = require("model.vars");
        spec.custom_vars = detail::split_list(vars);
        if (spec.custom_vars.empty()) throw ConfigError("model.vars", "empty variable list");
        spec.potential_text = require("model.potential");
        std::set<std::string> allowed(spec.custom_vars.begin(), spec.custom_vars.end());
        try {
            poly_parse(spec.potential_text, allowed);
        } catch (const SyntaxError& e) {
            throw ConfigError("model.potential", e.what());
        } catch (const UnknownVariable& e) {
            throw ConfigError("model.potential", e.what());
        }
    }

    std::vector<std::string> model_vars;
    if (spec.model_type == "custom") {
        model_vars = spec.custom_vars;
    } else {
        model_vars = {"S", "Q"};
        if (spec.l_is_variable) model_vars.push_back("l");
    }

    // --- sweep section ---
    const std::string* sweep_var = take("sweep.var");
    spec.sweep.active = VarId(sweep_var ? *sweep_var : "S");
    bool active_known = false;
    for (const auto& v : model_vars) active_known = active_known || v == spec.sweep.active.name;
    if (!active_known)
        throw ConfigError("sweep.var", "'" + spec.sweep.active.name + "' is not a model coordinate");

    spec.sweep.min = detail::config_double("sweep.min", require("sweep.min"));
    spec.sweep.max = detail::config_double("sweep.max", require("sweep.max"));
    if (!(spec.sweep.min > 0.0))
        throw ConfigError("sweep.min", "sweep range must stay strictly positive");
    if (!(spec.sweep.min < spec.sweep.max)) throw ConfigError("sweep.max", "need min < max");
    if (const std::string* v = take("sweep.points")) {
        long long p = detail::config_int("sweep.points", *v);
        if (p < 16 || p > 2000000) throw ConfigError("sweep.points", "need 16 <= points <= 2e6");
        spec.sweep.points = static_cast<int>(p);
    }
    if (const std::string* v = take("sweep.scale")) {
        if (*v == "linear")
            spec.sweep.log_scale = false;
        else if (*v == "log")
            spec.sweep.log_scale = true;
        else
            throw ConfigError("sweep.scale", "must be linear or log");
    }
    for (const auto& v : model_vars) {
        if (v == spec.sweep.active.name) continue;
        const std::string key = "sweep.fixed." + v;
        double value = detail::config_double(key, require(key));
        if (!(value > 0.0)) throw ConfigError(key, "coordinates must be > 0");
        spec.sweep.fixed[VarId(v)] = value;
    }

    // --- quantities ---
    if (const std::string* v = take("quantities")) {
        for (const auto& item : detail::split_list(*v)) {
            auto q = quantity_from_name(item);
            if (!q) throw ConfigError("quantities", "unknown quantity '" + item + "'");
            spec.quantities.push_back(*q);
        }
        if (spec.quantities.empty()) throw ConfigError("quantities", "empty list");
    }

    // --- output / tolerances / analysis ---
    if (const std::string* v = take("output.dir")) spec.output_dir = *v;

    auto tol_key = [&](const std::string& key, double& slot) {
        if (const std::string* v = take(key)) {
            slot = detail::config_double(key, *v);
            if (!(slot > 0.0)) throw ConfigError(key, "tolerances must be > 0");
        }
    };
    tol_key("tolerance.match_rel", spec.tol.match_rel);
    tol_key("tolerance.f_zero_rel", spec.tol.f_zero_rel);
    tol_key("tolerance.bisect_rel", spec.tol.bisect_rel);
    tol_key("tolerance.pole_guard_rel", spec.tol.pole_guard_rel);
    tol_key("tolerance.growth_min", spec.tol.growth_min);

    if (const std::string* v = take("analysis.gtd_source")) {
        if (*v == "gtd")
            spec.gtd_source = GtdSource::gtd;
        else if (*v == "weinhold")
            spec.gtd_source = GtdSource::weinhold;
        else
            throw ConfigError("analysis.gtd_source", "must be gtd or weinhold");
    }
    if (const std::string* v = take("verify.coincidence"))
        spec.enforce_coincidence = detail::config_bool("verify.coincidence", *v);

    for (const auto& key : order)
        if (!consumed.count(key)) throw ConfigError(key, "unknown key");

    return spec;
}

// Instantiate the model a spec describes.
inline ThermoModel build_model(const RunSpec& spec) {
    if (spec.model_type == "custom") {
        std::vector<VarId> vars;
        for (const auto& v : spec.custom_vars) vars.emplace_back(v);
        return build_custom_model(std::move(vars), spec.potential_text);
    }
    return build_pmi_model(spec.n, spec.i, spec.l, spec.l_is_variable);
}

// Default quantity set when the config names none: everything the model
// supports, except that the conformally heavier Weinhold/Ruppeiner curvatures
// are skipped in three-coordinate mode (they remain available on request).
inline std::vector<Quantity> default_quantities(const ThermoModel& model) {
    std::vector<Quantity> qs{Quantity::T, Quantity::Phi};
    if (model.has_var(kL)) qs.push_back(Quantity::L);
    qs.push_back(Quantity::CQ);
    if (model.vars.size() >= 2) {
        qs.push_back(Quantity::R_gtd);
        if (model.vars.size() == 2) {
            qs.push_back(Quantity::R_w);
            qs.push_back(Quantity::R_rupp);
        }
    }
    qs.push_back(Quantity::f);
    return qs;
}

}  // namespace geotherm
