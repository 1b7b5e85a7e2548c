#pragma once

#include <cstdint>
#include <vector>

#include "minmax/inner_solvers.hpp"
#include "minmax/problems.hpp"

namespace minmax {

struct WraParams {
    double tau_threshold = 0.7;
    double p_threshold = 0.1;
    double p_plus = 0.4;
    double p_minus = 0.05;
    int max_rounds = 1000;

    void validate() const; // throws InvalidInput
};

struct PoolEntry {
    Vector y;
    SolverConfig omega;
    double p = 1.0;
};

struct ScenarioPool {
    std::vector<PoolEntry> entries;
    std::size_t size() const noexcept { return entries.size(); }
};

/// Draws n_omega entries from the solver's initial distribution, all with p = 1.
ScenarioPool pool_init(std::size_t n_omega, const Problem& problem, const InnerSolver& solver, Rng& rng);

struct WraOutcome {
    Vector approx_values;                  // F_i after the last round
    std::vector<std::size_t> rankings;     // ascending argsort, index tie-break
    int rounds_used = 0;
    std::int64_t fcalls_used = 0;
    std::vector<std::size_t> selected;     // k_i^worst
    std::vector<InnerState> states;        // per-candidate final inner state
    std::vector<std::size_t> refreshed;    // pool indices refreshed in post-processing
};

/// One WRA call: warm start over the pool, inner rounds until the Kendall
/// tau between successive approximations exceeds the threshold (or every
/// solver has stopped, or max_rounds, or the budget runs out), then pool
/// post-processing with refresh. Candidate i draws from
/// Rng::stream(key, i), where key is one next_u64() taken from rng at entry;
/// refreshes then use rng itself.
WraOutcome wra_approximate(ScenarioPool& pool, const std::vector<Vector>& candidates, const WraParams& params,
                           const InnerSolver& solver, const Problem& problem, Rng& rng, FcallCounter& counter);

} // namespace minmax
