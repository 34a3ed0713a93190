#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gpwide/gpwide.hpp"

int main(int argc, char** argv) {
    CLI::App app{"solver and verification harness for weighted space-time "
                 "reaction-diffusion functionals"};
    app.name("gpwide");

    std::string config_path;
    std::string mode;
    std::string out_dir;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "path to the run configuration")->required();
    app.add_option("--mode", mode, "override run mode: wide|parabolic|both");
    app.add_option("--out-dir", out_dir, "override the output directory");
    app.add_option("--override", overrides, "config overrides as section.key=value");

    CLI11_PARSE(app, argc, argv);

    try {
        auto [spec, opts] = gpwide::load_config(config_path, overrides);
        if (!mode.empty()) opts.mode = gpwide::RunOptions::parse_mode(mode);
        if (!out_dir.empty()) opts.out_dir = out_dir;
        return gpwide::run(spec, opts);
    } catch (const gpwide::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return gpwide::kExitConfig;
    } catch (const gpwide::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return gpwide::kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "numerics error: " << e.what() << "\n";
        return gpwide::kExitNumerics;
    }
}
