// Command-line front end: run sweeps, verify invariants, inspect models.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "geotherm/runner.hpp"

namespace {

// A positional argument names either a preset or a config file on disk.
geotherm::RunSpec load_spec(const std::string& arg) {
    if (const geotherm::Preset* p = geotherm::find_preset(arg))
        return geotherm::parse_config(p->config, p->name);
    std::ifstream in(arg, std::ios::binary);
    if (!in) throw geotherm::ConfigError(arg, "no such preset or config file");
    std::ostringstream text;
    text << in.rdbuf();
    std::string stem = std::filesystem::path(arg).stem().string();
    return geotherm::parse_config(text.str(), stem);
}

int cmd_run(const std::string& arg) {
    geotherm::RunSpec spec = load_spec(arg);
    return geotherm::run(spec, std::cout);
}

int cmd_show_model(const std::string& arg) {
    geotherm::RunSpec spec = load_spec(arg);
    return geotherm::show_model(spec, std::cout);
}

int cmd_verify(const std::string& arg) {
    geotherm::CheckList checks;
    bool is_suite = false;
    for (const auto& name : geotherm::suite_names())
        if (name == arg) is_suite = true;
    if (is_suite) {
        checks = geotherm::run_suite(arg);
    } else {
        geotherm::RunSpec spec = load_spec(arg);
        checks = geotherm::run_checks_for_config(spec);
    }
    return geotherm::run_verify(checks, std::cout);
}

int cmd_presets() {
    for (const auto& p : geotherm::presets())
        std::cout << p.name << "  " << p.description << "\n";
    return geotherm::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geotherm: thermodynamic geometry of black-hole fundamental equations"};
    app.set_version_flag("--version", geotherm::kVersion);
    app.require_subcommand(1);

    std::string run_arg, show_arg, verify_arg;
    CLI::App* run_cmd = app.add_subcommand("run", "sweep a model and write csv/report/manifest");
    run_cmd->add_option("config", run_arg, "preset name or config file")->required();
    CLI::App* verify_cmd = app.add_subcommand("verify", "run a check suite or config checks");
    verify_cmd->add_option("suite", verify_arg, "suite name or config file")->required();
    CLI::App* presets_cmd = app.add_subcommand("presets", "list built-in presets");
    CLI::App* show_cmd = app.add_subcommand("show-model", "print the symbolic model content");
    show_cmd->add_option("config", show_arg, "preset name or config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? geotherm::kExitOk : geotherm::kExitConfig;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(run_arg);
        if (verify_cmd->parsed()) return cmd_verify(verify_arg);
        if (presets_cmd->parsed()) return cmd_presets();
        if (show_cmd->parsed()) return cmd_show_model(show_arg);
    } catch (const geotherm::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return geotherm::kExitConfig;
    } catch (const geotherm::InvalidParameter& e) {
        std::cerr << "invalid parameter: " << e.what() << "\n";
        return geotherm::kExitConfig;
    } catch (const geotherm::SyntaxError& e) {
        std::cerr << "expression error: " << e.what() << "\n";
        return geotherm::kExitConfig;
    } catch (const geotherm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return geotherm::kExitNumeric;
    }
    return geotherm::kExitConfig;
}
