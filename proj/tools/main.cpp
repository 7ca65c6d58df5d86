#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace anomaly;
using namespace anomaly::cli;

int main(int argc, char** argv) {
    CLI::App app{"Lyapunov exponents and variances of random SL(2,R) anomalies"};
    app.require_subcommand(1);

    std::string config_path;
    RunOptions opt;
    std::uint64_t seed = 0;

    using Runner = int (*)(const ExperimentConfig&, const RunOptions&);
    const std::map<std::string, std::pair<Runner, std::string>> commands{
        {"classify", {run_classify, "classify the averaged perturbation and print the normal form"}},
        {"predict", {run_predict, "perturbative constants as JSON"}},
        {"simulate", {run_simulate, "Monte Carlo gamma and sigma for every lambda"}},
        {"measure", {run_measure, "invariant-measure histogram and mass outside a ball"}},
        {"correlate", {run_correlate, "correlation sums from fixed start angles"}},
        {"compare", {run_compare, "Monte Carlo vs prediction with pass/fail and slope fits"}},
        {"sweep", {run_sweep, "all of the above"}},
    };
    std::map<CLI::App*, Runner> runners;
    for (const auto& [name, entry] : commands) {
        CLI::App* sub = app.add_subcommand(name, entry.second);
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "master seed, overrides the config");
        sub->add_option("--threads", opt.threads, "worker threads; results do not depend on it")
            ->check(CLI::Range(1u, 1024u))
            ->capture_default_str();
        runners[sub] = entry.first;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        for (const auto& [sub, run] : runners) {
            if (!sub->parsed()) continue;
            if (sub->count("--seed") > 0) opt.seed = seed;
            return run(load_config(config_path), opt);
        }
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
