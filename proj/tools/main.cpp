#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "minmax/config.hpp"
#include "minmax/errors.hpp"
#include "minmax/harness.hpp"

namespace {

minmax::ExperimentConfig load_or_default(const std::string& path) {
    if (path.empty()) return minmax::ExperimentConfig{};
    return minmax::load_config(path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Derivative-free min-max optimization experiments"};
    app.require_subcommand(1);

    std::string config_path;
    int jobs = 1;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string format;

    const auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", config_path, "experiment config (JSON, comments allowed)");
        if (needs_config) opt->required()->check(CLI::ExistingFile);
        cmd->add_option("--jobs", jobs, "parallel trial workers")->check(CLI::PositiveNumber);
        cmd->add_option("--seed", seed, "master seed, overrides the config");
        cmd->add_option("--out", out_dir, "output directory, overrides the config");
        cmd->add_option("--format", format, "trace format for run, output format for eval and list")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    auto* run = app.add_subcommand("run", "run n_trials trials per algorithm and write traces + summary.json");
    add_common(run, true);
    auto* bench = app.add_subcommand("bench", "run the sweep product and write summary.csv (resumable)");
    add_common(bench, true);

    auto* eval = app.add_subcommand("eval", "certify the worst-case value of a solution vector");
    add_common(eval, false);
    minmax::EvalOptions eval_opts;
    eval->add_option("--solution", eval_opts.solution_path, "solution vector: JSON array or whitespace separated")
        ->required();
    eval->add_option("--starts", eval_opts.n_starts, "multistart restarts")->check(CLI::PositiveNumber);
    eval->add_option("--budget-per-start", eval_opts.budget_per_start, "elitist steps per start")
        ->check(CLI::NonNegativeNumber);

    auto* list = app.add_subcommand("list", "list the test problems");
    list->add_option("--format", format, "csv prints a table, json a machine-readable list")
        ->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (list->parsed()) return minmax::cmd_list(format == "json", std::cout);

        minmax::ExperimentConfig config = load_or_default(config_path);
        minmax::HarnessOptions opts;
        opts.jobs = jobs;
        if (run->count("--seed") || bench->count("--seed") || eval->count("--seed"))
            opts.seed = seed;
        if (!out_dir.empty()) opts.out_dir = out_dir;
        if (!format.empty()) opts.format = format;

        if (run->parsed()) return minmax::cmd_run(config, opts, std::cout, std::cerr);
        if (bench->parsed()) return minmax::cmd_bench(config, opts, std::cout, std::cerr);
        if (eval->parsed()) {
            eval_opts.json = format == "json";
            eval_opts.seed = opts.seed.value_or(config.master_seed);
            return minmax::cmd_eval(config, eval_opts, std::cout, std::cerr);
        }
    } catch (const minmax::ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return 2;
    } catch (const minmax::Unsupported& e) {
        std::cerr << "unsupported: " << e.what() << "\n";
        return 3;
    } catch (const minmax::InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
