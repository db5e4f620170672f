// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include "ftns/commands.hpp"
#include "ftns/errors.hpp"
#include "ftns/version.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace ftns {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Finite-time Newton extremum seeking simulator", "ftns"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    std::string config_path, system = "esc", param, values, out_dir;

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config file")->required();
        sub->add_option("--out", out_dir, "output directory (default: output.directory)");
    };

    CLI::App* run = app.add_subcommand("run", "integrate one system and write CSV + metadata");
    common(run);
    run->add_option("--system", system, "esc | target | averaged")
        ->check(CLI::IsMember({"esc", "target", "averaged"}));

    CLI::App* compare = app.add_subcommand("compare", "ESC against a reference on the same grid");
    common(compare);
    std::string reference = "averaged";
    compare->add_option("--system", reference, "reference system (default averaged)")
        ->check(CLI::IsMember({"esc", "target", "averaged"}));

    CLI::App* sw = app.add_subcommand("sweep", "run once per value of one parameter");
    common(sw);
    sw->add_option("--system", system, "esc | target | averaged")
        ->check(CLI::IsMember({"esc", "target", "averaged"}));
    sw->add_option("--param", param, "section.key or section.key[i]")->required();
    sw->add_option("--values", values, "comma-separated values (may be empty)")->required();

    CLI::App* validate = app.add_subcommand("validate", "config checks and demodulation oracle");
    common(validate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion& e) {
        out << kVersion << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    ExperimentConfig cfg;
    try {
        cfg = parse_config(config_path);
    } catch (const ConfigError& e) {
        for (const std::string& m : e.errors()) err << "error: " << m << '\n';
        return kExitValidation;
    } catch (const std::ios_base::failure& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }

    const CommandContext ctx{out_dir, &out, &err};
    if (*run) return cmd_run(cfg, parse_system(system), ctx);
    if (*compare) return cmd_compare(cfg, parse_system(reference), ctx);
    if (*validate) return cmd_validate(cfg, ctx);

    std::vector<double> list;
    try {
        list = parse_value_list(values);
    } catch (const ParameterError& e) {
        err << "error: --values: " << e.what() << '\n';
        return kExitValidation;
    }
    return cmd_sweep(cfg, param, list, parse_system(system), ctx);
}

}  // namespace ftns
