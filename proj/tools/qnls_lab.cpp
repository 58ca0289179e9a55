#include <iostream>

#include <CLI11.hpp>

#include "qnls/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Ground states, evolution and the blow-up dichotomy for the quadratic Schrodinger system"};
    app.require_subcommand(1);

    qnls::cli::Options opts;
    std::string config;
    std::vector<std::string> sets;
    std::string out;
    long seed = 0;

    for (const char* name : {"ground-state", "evolve", "dichotomy", "verify"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "JSON configuration file");
        sub->add_option("--set", sets, "Override a leaf, e.g. --set grid.n=4 (repeatable)")->take_all();
        sub->add_option("--out", out, "Output directory");
        sub->add_option("--seed", seed, "Seed for the randomized checks");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    auto* sub = app.get_subcommands().front();
    opts.subcommand = sub->get_name();
    opts.config_path = config;
    opts.sets = sets;
    if (sub->count("--out")) opts.out = out;
    if (sub->count("--seed")) opts.seed = seed;
    return qnls::cli::main_entry(opts, std::cout, std::cerr);
}
