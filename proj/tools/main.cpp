#include "rieszapp/commands.hpp"
#include "rieszapp/config.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

int main(int argc, char** argv) {
    CLI::App app{"rieszlab: equilibrium measures, Gibbs sampling and fluctuation statistics for Riesz gases"};
    std::string subcommand, config_path, out;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool deterministic = false;
    bool check_only = false;
    app.add_option("subcommand", subcommand, "equilibrium | sample | locallaw | clt | transport | selftest")
        ->required()
        ->check(CLI::IsMember(rieszapp::subcommands()));
    app.add_option("--config", config_path, "INI-style run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "master seed (overrides run.seed)");
    app.add_option("--out", out, "output directory (overrides run.out)");
    app.add_option("--threads", threads, "worker threads (overrides run.threads)")->check(CLI::PositiveNumber);
    app.add_flag("--deterministic", deterministic, "single thread and no timestamps in the manifest");
    app.add_flag("--check", check_only, "validate the configuration and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : rieszapp::exit_usage;
    }

    rieszapp::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = rieszapp::load_config(config_path);
    } catch (const rieszapp::ConfigError& e) {
        std::cerr << "config: " << e.what() << "\n";
        return rieszapp::exit_validation;
    }
    if (seed) cfg.run.seed = *seed;
    if (!out.empty()) cfg.run.out = out;
    if (threads) cfg.run.threads = *threads;
    if (deterministic) cfg.run.deterministic = true;

    if (check_only) {
        const auto v = rieszapp::validate_config(cfg);
        for (const auto& msg : v) std::cerr << "config: " << msg << "\n";
        return v.empty() ? rieszapp::exit_ok : rieszapp::exit_validation;
    }
    return rieszapp::run(subcommand, cfg, std::cout, std::cerr);
}
