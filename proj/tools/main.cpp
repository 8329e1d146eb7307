#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
    using namespace mbsense::cli;
    CLI::App app{"Sensing limits and spectrum optimization for multiband OFDM delay estimation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    CommandOptions opt;
    std::uint64_t seed = 0;
    std::string chosen;
    for (const auto& name : command_names()) {
        CLI::App* sub = app.add_subcommand(name, "");
        sub->add_option("--config", opt.config_path, "structured config (JSON, SI units)")->required();
        sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("--with-map", opt.with_map, "add the Monte Carlo MAP column (zzb)");
        sub->callback([&chosen, name] { chosen = name; });
    }
    app.get_subcommand("crb-vs-sep")->description("sqrt CRB of the delay separation versus separation");
    app.get_subcommand("srl-vs-aperture")->description("delay SRL versus frequency band aperture");
    app.get_subcommand("deb-vs-aperture")->description("DEB versus aperture for the four distortion cases");
    app.get_subcommand("zzb")->description("Ziv-Zakai bound and ECRB over SNR or aperture");
    app.get_subcommand("map-rmse")->description("Monte Carlo MAP RMSE over SNR or aperture");
    app.get_subcommand("optimize")->description("alternating optimization of carriers and subcarrier counts");
    app.get_subcommand("verify")->description("rerun the artifacts in --out and compare bytes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kConfigInvalid;
    }
    for (const auto& name : command_names())
        if (app.get_subcommand(name)->count("--seed")) opt.seed = seed;
    return run_command(chosen, opt);
}
