// Config front end: the flat key-value grammar and its validation.

#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "geotherm/config.hpp"

using namespace geotherm;

namespace {

const std::string kMinimal =
    "model.type = pmi\n"
    "model.n = 4\n"
    "model.i = 4\n"
    "model.l = 1\n"
    "sweep.var = S\n"
    "sweep.min = 0.5\n"
    "sweep.max = 10\n"
    "sweep.fixed.Q = 1\n";

std::string expect_key(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.key_path;
    }
    return "";
}

}  // namespace

TEST_CASE("minimal config parses with defaults applied") {
    const RunSpec spec = parse_config(kMinimal, "mini");
    CHECK(spec.model_type == "pmi");
    CHECK(spec.n == 4);
    CHECK(spec.i == 4);
    CHECK(spec.l == 1.0);
    CHECK_FALSE(spec.l_is_variable);
    CHECK(spec.sweep.active == kS);
    CHECK(spec.sweep.min == 0.5);
    CHECK(spec.sweep.max == 10.0);
    CHECK(spec.sweep.points == 400);
    CHECK_FALSE(spec.sweep.log_scale);
    CHECK(spec.sweep.fixed.at(kQ) == 1.0);
    CHECK(spec.quantities.empty());   // auto-selected later
    CHECK(spec.output_dir == "out");
    CHECK(spec.tol.match_rel == 1e-6);
    CHECK(spec.gtd_source == GtdSource::gtd);
    CHECK(spec.enforce_coincidence);
    CHECK(spec.name == "mini");
    CHECK(spec.source_text == kMinimal);

    const ThermoModel model = build_model(spec);
    CHECK(model.vars.size() == 2);
    // deterministic: same text, same spec
    const RunSpec again = parse_config(kMinimal, "mini");
    CHECK(again.sweep.points == spec.sweep.points);
    CHECK(again.source_text == spec.source_text);
}

TEST_CASE("comments, blank lines, and spacing are tolerated") {
    const RunSpec spec = parse_config(
        "# a run\n"
        "model.type = rn   # fixes n=3, i=1\n"
        "\n"
        "model.l = 8\n"
        "sweep.min=5\n"
        "   sweep.max =   60\n"
        "sweep.fixed.Q = 1\n");
    CHECK(spec.n == 3);
    CHECK(spec.i == 1);
    CHECK(spec.l == 8.0);
    CHECK(spec.sweep.active == kS);  // default sweep.var
}

TEST_CASE("positivity and range guards") {
    CHECK(expect_key("model.type = pmi\nmodel.n = 4\nmodel.i = 4\n"
                     "sweep.min = 0\nsweep.max = 10\nsweep.fixed.Q = 1\n") == "sweep.min");
    CHECK(expect_key("model.type = pmi\nmodel.n = 4\nmodel.i = 4\n"
                     "sweep.min = 5\nsweep.max = 5\nsweep.fixed.Q = 1\n") == "sweep.max");
    CHECK(expect_key(kMinimal + "sweep.points = 8\n") == "sweep.points");
    CHECK(expect_key(kMinimal + "sweep.scale = cubic\n") == "sweep.scale");
    CHECK(expect_key("model.type = pmi\nmodel.n = 4\nmodel.i = 4\nmodel.l = -2\n"
                     "sweep.min = 1\nsweep.max = 2\nsweep.fixed.Q = 1\n") == "model.l");
    CHECK(expect_key(kMinimal + "tolerance.match_rel = -1\n") == "tolerance.match_rel");
}

TEST_CASE("the excluded exponent line is a config error") {
    const std::string text =
        "model.type = pmi\nmodel.n = 5\nmodel.i = 4\n"
        "sweep.min = 1\nsweep.max = 2\nsweep.fixed.Q = 1\n";
    try {
        parse_config(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key_path == "model.n");
        CHECK(std::string(e.what()).find("n = 2s") != std::string::npos);
    }
}

TEST_CASE("half-integer exponent parameter forms") {
    const std::string head =
        "model.type = pmi\nmodel.n = 4\n"
        "sweep.min = 1\nsweep.max = 2\nsweep.fixed.Q = 1\n";
    CHECK(parse_config(head + "model.s = 5/2\n").i == 4);
    CHECK(parse_config(head + "model.s = 3\n").i == 5);
    CHECK(parse_config(head + "model.s = 5/2\nmodel.i = 4\n").i == 4);
    CHECK(expect_key(head + "model.s = 5/4\n") == "model.s");
    CHECK(expect_key(head + "model.s = 5/2\nmodel.i = 3\n") == "model.s");
    CHECK(expect_key(head + "model.s = 4/2\n") == "model.s");
}

TEST_CASE("unknown and duplicate keys are rejected") {
    CHECK(expect_key(kMinimal + "model.charge = 7\n") == "model.charge");
    CHECK(expect_key(kMinimal + "sweep.min = 2\n") == "sweep.min");  // duplicate
    CHECK(expect_key("model.type = pmi\nmodel.n = 4\nmodel.i = 4\nnonsense\n"
                     "sweep.min = 1\nsweep.max = 2\nsweep.fixed.Q = 1\n") == "line 4");
}

TEST_CASE("missing required keys are reported by path") {
    CHECK(expect_key("model.type = pmi\nmodel.i = 4\n"
                     "sweep.min = 1\nsweep.max = 2\nsweep.fixed.Q = 1\n") == "model.n");
    CHECK(expect_key("model.type = pmi\nmodel.n = 4\n"
                     "sweep.min = 1\nsweep.max = 2\nsweep.fixed.Q = 1\n") == "model.i");
    CHECK(expect_key(
              "model.type = pmi\nmodel.n = 4\nmodel.i = 4\nsweep.max = 2\nsweep.fixed.Q = 1\n") ==
          "sweep.min");
    CHECK(expect_key("model.type = pmi\nmodel.n = 4\nmodel.i = 4\nsweep.min = 1\n"
                     "sweep.max = 2\n") == "sweep.fixed.Q");
}

TEST_CASE("rn is the fixed Maxwell point of the family") {
    CHECK(expect_key("model.type = rn\nmodel.n = 4\n"
                     "sweep.min = 1\nsweep.max = 2\nsweep.fixed.Q = 1\n") == "model.n");
    const RunSpec spec = parse_config(
        "model.type = rn\nmodel.n = 3\nmodel.l = 8\n"
        "sweep.min = 5\nsweep.max = 60\nsweep.fixed.Q = 1\n");
    CHECK(spec.n == 3);
    CHECK(spec.i == 1);
}

TEST_CASE("custom models validate their potential at parse time") {
    const std::string head =
        "model.type = custom\nmodel.vars = S, Q\n"
        "sweep.min = 1\nsweep.max = 2\nsweep.fixed.Q = 1\n";
    const RunSpec ok = parse_config(head + "model.potential = S^2 + Q^2\n");
    CHECK(ok.custom_vars == std::vector<std::string>{"S", "Q"});
    const ThermoModel model = build_model(ok);
    CHECK(model.kind == ModelKind::custom);

    CHECK(expect_key(head + "model.potential = S^2 +\n") == "model.potential");
    CHECK(expect_key(head + "model.potential = S^2 + x\n") == "model.potential");
    CHECK(expect_key("model.type = custom\nmodel.potential = S^2\n"
                     "sweep.min = 1\nsweep.max = 2\n") == "model.vars");
}

TEST_CASE("sweep variable must be a model coordinate") {
    CHECK(expect_key(kMinimal + "sweep.var = l\n") == "sweep.var");
    const std::string three =
        "model.type = pmi\nmodel.n = 4\nmodel.i = 4\nmodel.l_is_variable = true\n"
        "sweep.var = l\nsweep.min = 0.5\nsweep.max = 3\n"
        "sweep.fixed.S = 10\nsweep.fixed.Q = 1\n";
    const RunSpec spec = parse_config(three);
    CHECK(spec.sweep.active == kL);
    CHECK(spec.sweep.fixed.at(kS) == 10.0);
}

TEST_CASE("quantity lists and analysis options") {
    const RunSpec spec = parse_config(kMinimal +
                                      "quantities = CQ, R_gtd , f\n"
                                      "analysis.gtd_source = weinhold\n"
                                      "verify.coincidence = false\n"
                                      "output.dir = /tmp/somewhere\n"
                                      "tolerance.match_rel = 1e-8\n");
    CHECK(spec.quantities ==
          std::vector<Quantity>{Quantity::CQ, Quantity::R_gtd, Quantity::f});
    CHECK(spec.gtd_source == GtdSource::weinhold);
    CHECK_FALSE(spec.enforce_coincidence);
    CHECK(spec.output_dir == "/tmp/somewhere");
    CHECK(spec.tol.match_rel == 1e-8);

    CHECK(expect_key(kMinimal + "quantities = CQ, volume\n") == "quantities");
    CHECK(expect_key(kMinimal + "analysis.gtd_source = ruppeiner\n") == "analysis.gtd_source");
    CHECK(expect_key(kMinimal + "verify.coincidence = yes\n") == "verify.coincidence");
}

TEST_CASE("malformed scalars name the offending key") {
    CHECK(expect_key("model.type = pmi\nmodel.n = four\nmodel.i = 4\n"
                     "sweep.min = 1\nsweep.max = 2\nsweep.fixed.Q = 1\n") == "model.n");
    CHECK(expect_key(kMinimal + "sweep.points = many\n") == "sweep.points");
    CHECK(expect_key("model.type = pmi\nmodel.n = 4\nmodel.i = 4\n"
                     "sweep.min = 1\nsweep.max = 2\nsweep.fixed.Q = 1e\n") == "sweep.fixed.Q");
}

TEST_CASE("default quantity sets track the model shape") {
    const RunSpec two = parse_config(kMinimal);
    const auto dq2 = default_quantities(build_model(two));
    CHECK(std::find(dq2.begin(), dq2.end(), Quantity::R_w) != dq2.end());
    CHECK(std::find(dq2.begin(), dq2.end(), Quantity::L) == dq2.end());

    const RunSpec three = parse_config(
        "model.type = pmi\nmodel.n = 4\nmodel.i = 4\nmodel.l_is_variable = true\n"
        "sweep.var = l\nsweep.min = 0.5\nsweep.max = 3\n"
        "sweep.fixed.S = 10\nsweep.fixed.Q = 1\n");
    const auto dq3 = default_quantities(build_model(three));
    CHECK(std::find(dq3.begin(), dq3.end(), Quantity::L) != dq3.end());
    CHECK(std::find(dq3.begin(), dq3.end(), Quantity::R_gtd) != dq3.end());
    // the heavier conformal curvatures stay opt-in for three coordinates
    CHECK(std::find(dq3.begin(), dq3.end(), Quantity::R_w) == dq3.end());
    CHECK(std::find(dq3.begin(), dq3.end(), Quantity::R_rupp) == dq3.end());
}
