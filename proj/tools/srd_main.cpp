#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "srd/srd.h"

int main(int argc, char** argv) {
    CLI::App app{"Singular reaction-diffusion barrier and verification runner"};
    std::string config_path;
    std::string output_dir;
    std::uint64_t seed = 0;
    int jobs = 0;
    double tolerance_scale = 1.0;
    bool no_timing = false;
    bool quiet = false;
    app.add_option("-c,--config", config_path, "INI configuration file ('-' reads stdin)")->required();
    auto* output_opt = app.add_option("-o,--output", output_dir, "Output directory (overrides the configuration)");
    auto* seed_opt = app.add_option("-s,--seed", seed, "Seed (overrides the configuration)");
    app.add_option("-j,--jobs", jobs, "Worker threads; 0 uses all cores")->check(CLI::NonNegativeNumber);
    app.add_option("--tolerance-scale", tolerance_scale, "Multiplier applied to every tolerance")
        ->check(CLI::PositiveNumber);
    app.add_flag("--no-timing", no_timing, "Write wall_ms as 0 so reruns are byte-identical");
    app.add_flag("-q,--quiet", quiet, "Suppress progress output");
    app.set_version_flag("--version", std::string(srd_version()));
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    std::stringstream text;
    if (config_path == "-") {
        text << std::cin.rdbuf();
    } else {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) {
            std::fprintf(stderr, "i/o error: cannot read '%s'\n", config_path.c_str());
            return 2;
        }
        text << in.rdbuf();
    }

    srd_run_options options;
    srd_run_options_default(&options);
    if (*output_opt) options.output_dir = output_dir.c_str();
    if (*seed_opt) {
        options.has_seed = 1;
        options.seed = seed;
    }
    options.jobs = jobs;
    options.tolerance_scale = tolerance_scale;
    options.record_timing = no_timing ? 0 : 1;
    options.quiet = quiet ? 1 : 0;

    int exit_code = 0;
    const std::string source = text.str();
    const srd_status status = srd_run_config(source.c_str(), &options, &exit_code);
    if (status != SRD_OK) {
        std::fprintf(stderr, "%s: %s\n", srd_status_name(status), srd_last_error());
        return 3;
    }
    return exit_code;
}
