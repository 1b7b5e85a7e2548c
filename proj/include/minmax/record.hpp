#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "minmax/problems.hpp"

namespace minmax {

struct RunOptions {
    std::int64_t budget = 10'000'000;
    double target_gap = 1e-6;   // success threshold on |F(z) - F*|
    bool stop_on_target = true; // end the trial once the target is reached
    bool restarts = false;      // WRA variants: restart on internal termination
    int certify_random_scenarios = 0;
};

struct TraceRow {
    std::int64_t fcalls = 0;
    std::int64_t iteration = 0;
    double gap = 0.0;
    double best_approx_F = 0.0; // NaN when the algorithm has no approximation yet
    int restarts = 0;
};

struct TrialRecord {
    std::uint64_t seed = 0;
    std::string algorithm;
    ProblemSpec problem;
    std::int64_t budget = 0;
    std::vector<TraceRow> trace;
    int restarts = 0;
    std::int64_t iterations = 0;
    std::int64_t fcalls_used = 0;
    Vector final_x;
    double final_gap = 0.0;
    double best_gap = 0.0;
    bool success = false;
    std::optional<std::int64_t> fcalls_to_success;
    std::string stop_reason;
    std::int64_t certification_fcalls = 0;
    double wall_time = 0.0; // seconds; not written to trial outputs
};

/// Appends gap rows to a TrialRecord and watches the success criterion.
/// With thinning a row is kept only once f-calls grew by about 1% since the
/// last kept row; success is still checked on every call and the row that
/// reaches the target is always kept.
class TraceLogger {
public:
    TraceLogger(const Problem& problem, const RunOptions& options, TrialRecord& record, bool thin);

    /// Logs the gap at z. Returns true when the trial should stop on target.
    bool log(std::int64_t fcalls, std::int64_t iteration, std::span<const double> z, double best_approx_F, int restarts);
    /// Writes any pending thinned row, sets final_x / final_gap / fcalls_used.
    void finish(std::int64_t fcalls, std::span<const double> final_x, const std::string& reason);

    bool reached() const noexcept { return record_.success; }

private:
    void push(const TraceRow& row);

    const Problem& problem_;
    RunOptions options_;
    TrialRecord& record_;
    bool thin_;
    std::optional<TraceRow> pending_;
    double best_gap_;
};

} // namespace minmax
