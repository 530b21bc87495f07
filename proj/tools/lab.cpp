#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sgdlab/cli/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"SGD noise experiments"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
    run->add_option("config", config_path, "Config file")->required();

    std::string report_dir;
    auto* report = app.add_subcommand("report", "Summarize every run below a directory");
    report->add_option("dir", report_dir, "Run directory")->required();

    std::size_t d = 1, n = 10000;
    std::uint64_t seed = 0;
    std::string out_path;
    auto* gen = app.add_subcommand("gen-data", "Write a Gaussian linear-regression data set as CSV");
    gen->add_option("--d", d, "Input dimension")->required();
    gen->add_option("--n", n, "Sample count")->required();
    gen->add_option("--seed", seed, "Seed")->required();
    gen->add_option("--out", out_path, "Output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : sgdlab::cli::kExitConfig;
    }

    try {
        if (*run) return sgdlab::cli::run_command(config_path, std::cout, std::cerr);
        if (*report) return sgdlab::cli::report_command(report_dir, std::cout, std::cerr);
        return sgdlab::cli::gen_data_command(d, n, seed, out_path, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return sgdlab::cli::kExitNumeric;
    }
}
