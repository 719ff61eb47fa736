#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bmin/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"bmin: weighted-minimal graph curves and surfaces, soliton checks, and "
                 "spectral stability verification"};
    std::string config_path;
    std::string out_override;
    bool quiet = false;
    app.add_option("--config", config_path, "JSON task configuration")->required();
    app.add_option("--out", out_override, "Override the configured output directory");
    app.add_flag("--quiet", quiet, "Suppress progress output");
    CLI11_PARSE(app, argc, argv);

    try {
        bmin::cli::RunConfig config = bmin::cli::load_config(config_path);
        if (!out_override.empty()) config.output_dir = out_override;
        config.quiet = config.quiet || quiet;
        return bmin::cli::run(config);
    } catch (const bmin::cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
