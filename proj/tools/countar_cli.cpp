#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "countar/cli.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Simulation and condition checking for multivariate count autoregressions"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(countar::kVersion));

    struct Args {
        std::string config;
        std::uint64_t seed = 0;
        std::string out;
        std::size_t jobs = countar::default_jobs();
        bool strict = false;
    };
    Args args;

    const std::pair<const char*, countar::ExperimentKind> commands[] = {
        {"check", countar::ExperimentKind::Check},
        {"simulate", countar::ExperimentKind::Simulate},
        {"couple", countar::ExperimentKind::Couple},
        {"moments", countar::ExperimentKind::Moments},
    };
    std::vector<std::pair<CLI::App*, countar::ExperimentKind>> subs;
    std::vector<CLI::Option*> seed_opts, out_opts;
    for (const auto& [name, kind] : commands) {
        CLI::App* sub = app.add_subcommand(name, std::string("run a ") + name + " experiment");
        sub->add_option("--config", args.config, "experiment config (JSON)")
            ->required()
            ->check(CLI::ExistingFile);
        seed_opts.push_back(sub->add_option("--seed", args.seed, "override the master seed"));
        out_opts.push_back(sub->add_option("--out", args.out, "override the output directory"));
        sub->add_option("--jobs", args.jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("--strict", args.strict, "exit 2 if a required condition does not hold");
        subs.emplace_back(sub, kind);
    }

    CLI11_PARSE(app, argc, argv);

    countar::RunOptions options;
    options.jobs = args.jobs;
    options.strict = args.strict;
    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (!subs[i].first->parsed())
            continue;
        options.command = subs[i].second;
        if (seed_opts[i]->count() > 0)
            options.seed = args.seed;
        if (out_opts[i]->count() > 0)
            options.output_dir = args.out;
    }
    return countar::run_file(args.config, options, std::cout, std::cerr);
}
