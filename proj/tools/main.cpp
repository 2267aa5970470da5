#include "ksup/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Superposition representations with certified stages"};
    app.require_subcommand(1);

    std::string config;
    auto* approx = app.add_subcommand("approximate", "run the iteration from a config file");
    approx->add_option("config", config, "key = value config file")->required();

    std::string rep_path, points, output;
    auto* eval = app.add_subcommand("eval", "evaluate a representation at points from a CSV");
    eval->add_option("representation", rep_path, "representation.json or report.json")->required();
    eval->add_option("points", points, "CSV, one point per row")->required();
    eval->add_option("-o,--output", output, "write here instead of stdout");

    std::string check_path;
    auto* check = app.add_subcommand("check", "re-verify every stored invariant");
    check->add_option("path", check_path, "representation.json or report.json")->required();

    std::string plot_path, kind, out_dir;
    auto* plot = app.add_subcommand("plot", "write an SVG and its CSV");
    plot->add_option("path", plot_path, "representation.json or report.json")->required();
    plot->add_option("kind", kind, "residual-decay, h-gallery, phi-gallery or g")->required();
    plot->add_option("-o,--out-dir", out_dir, "defaults to the input's directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ksup::cli::kConfigError;
    }

    if (*approx)
        return ksup::cli::cmd_approximate(config, std::cout, std::cerr);
    if (*eval)
        return ksup::cli::cmd_eval(rep_path, points, output, std::cout, std::cerr);
    if (*check)
        return ksup::cli::cmd_check(check_path, std::cout, std::cerr);
    return ksup::cli::cmd_plot(plot_path, kind, out_dir, std::cout, std::cerr);
}
