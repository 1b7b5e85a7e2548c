#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "minmax/config.hpp"
#include "minmax/evaluation.hpp"

namespace minmax {

/// Command-line overrides applied on top of the config file.
struct HarnessOptions {
    int jobs = 1;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;
};

/// Trial i runs with seed master_seed XOR i.
std::uint64_t trial_seed(std::uint64_t master_seed, int index);

/// Runs n_trials trials of one configuration on a pool of `jobs` workers.
/// Results are indexed by trial and do not depend on jobs.
std::vector<TrialRecord> run_batch(const ProblemSpec& problem, const AlgorithmConfig& algo, const RunOptions& run,
                                   int n_trials, std::uint64_t master_seed, int jobs);

/// Trace CSV with header fcalls,iteration,gap,best_approx_F,restarts.
std::string trace_csv(const TrialRecord& record);
std::string trace_json(const TrialRecord& record);
/// Summary JSON of one batch: statistics, per-trial results and gap curves.
std::string batch_summary_json(std::span<const TrialRecord> records, const BatchSummary& summary);

inline constexpr const char* kSummaryCsvHeader =
    "problem,algorithm,b,dx,dy,n_success,n_trials,median_fcalls,q25_fcalls,q75_fcalls";
std::string summary_csv_row(const BatchSummary& summary);

/// Exit codes: 0 done, 2 invalid config or input, 3 unsupported combination.
int cmd_run(const ExperimentConfig& config, const HarnessOptions& options, std::ostream& out, std::ostream& err);
int cmd_bench(const ExperimentConfig& config, const HarnessOptions& options, std::ostream& out, std::ostream& err);

struct EvalOptions {
    std::string solution_path;
    int n_starts = 100;
    std::int64_t budget_per_start = 1000;
    std::uint64_t seed = 1;
    bool json = false;
};
int cmd_eval(const ExperimentConfig& config, const EvalOptions& options, std::ostream& out, std::ostream& err);

int cmd_list(bool json, std::ostream& out);

} // namespace minmax
