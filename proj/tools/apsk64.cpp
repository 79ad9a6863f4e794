#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "apsk/experiments.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config file")
        ->required();
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--out", args.out, "override the output path");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"64-APSK constellation design and evaluation toolkit"};
    app.require_subcommand(1);

    CommonArgs analyze, sweep, opt, image;
    auto* cmd_analyze =
        app.add_subcommand("analyze-mapping", "intra/inter ring distortion tables");
    add_common(cmd_analyze, analyze);
    auto* cmd_sweep = app.add_subcommand("sweep-snr", "Monte Carlo MSE over an SNR grid");
    add_common(cmd_sweep, sweep);
    auto* cmd_opt = app.add_subcommand("optimize", "genetic constellation optimization");
    add_common(cmd_opt, opt);
    auto* cmd_image =
        app.add_subcommand("transmit-image", "grey-map payload transmission demo");
    add_common(cmd_image, image);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_analyze->parsed()) {
            const auto cfg = apsk::Config::load(analyze.config_path);
            apsk::run_analyze_mapping(cfg, {analyze.seed, analyze.out});
        } else if (cmd_sweep->parsed()) {
            const auto cfg = apsk::Config::load(sweep.config_path);
            apsk::run_sweep_snr(cfg, {sweep.seed, sweep.out});
        } else if (cmd_opt->parsed()) {
            const auto cfg = apsk::Config::load(opt.config_path);
            apsk::run_optimize(cfg, {opt.seed, opt.out}, &std::cout);
        } else if (cmd_image->parsed()) {
            const auto cfg = apsk::Config::load(image.config_path);
            apsk::run_transmit_image(cfg, {image.seed, image.out});
        }
    } catch (const apsk::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const apsk::io_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
