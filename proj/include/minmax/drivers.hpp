#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "minmax/cmaes.hpp"
#include "minmax/elitist.hpp"
#include "minmax/inner_solvers.hpp"
#include "minmax/record.hpp"
#include "minmax/wra.hpp"

namespace minmax {

enum class Algorithm { WraCma, WraAga, WraCmaAdv, WraAgaAdv, AdvCma, ZoPgda };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view s);
bool is_wra(Algorithm a);
SolverKind solver_kind(Algorithm a); // WRA variants only

struct OuterOptions {
    double v_min_x = 1e-12;
    double cond_max_x = 1e14;
    std::optional<std::size_t> lambda_x;
    std::size_t n_omega = 36;
    bool stagnation = false; // stop when the best approximated F moved < tol over the window
    int stagnation_window = 10;
    double stagnation_tol = 0.01;

    void validate() const;
};

struct AdvCmaConfig {
    double g_tol = 1e-6;
    double eta_min = 1e-4;
    double sigma_min = 1e-8;
    double eta0 = 0.5;
    int inner_budget_factor = 10; // (1+1)-CMA-ES steps per direction = factor * dim

    void validate() const;
};

struct ZoPgdaConfig {
    double eta_x = 0.02;
    double eta_y = 0.05;
    int q = 5;
    double mu = 1e-3;
    bool restart = false;
    double restart_tol = 1e-5;

    void validate() const;
};

struct AlgorithmConfig {
    Algorithm algorithm = Algorithm::WraCma;
    WraParams wra;
    InnerSolverParams inner;
    OuterOptions outer;
    AdvCmaConfig adv;
    ZoPgdaConfig zo;
};

struct RestartArchive {
    std::vector<Vector> X_star;
    std::vector<Vector> Y_star;
};

struct ArchivePick {
    std::size_t index = 0;
    Vector x;
    double value = 0.0;                  // max over the scenario set
    std::int64_t certification_fcalls = 0;
};

/// argmin over X* of max over Y* (plus r uniform scenarios drawn from rng) of f.
/// Evaluations go to a separate certification count.
ArchivePick pick_from_archive(const Problem& problem, const RestartArchive& archive, int random_scenarios, Rng& rng);

/// Ask/tell loop of the outer CMA-ES with WRA ranking. One step() is one
/// outer iteration: ask, wra_approximate, tell.
class WraOptimizer {
public:
    WraOptimizer(const Problem& problem, const InnerSolver& solver, const WraParams& wra, const OuterOptions& outer,
                 std::uint64_t seed);

    /// f-calls needed for the next warm start.
    std::int64_t warm_start_cost() const;
    /// Performs one iteration. Returns a reason when the outer CMA-ES terminates.
    std::optional<std::string> step(FcallCounter& counter);

    const PopulationCma& outer() const noexcept { return outer_; }
    const ScenarioPool& pool() const noexcept { return pool_; }
    const std::vector<Vector>& last_candidates() const noexcept { return last_candidates_; }
    const WraOutcome& last_outcome() const noexcept { return last_outcome_; }
    double best_approx_F() const noexcept { return best_F_; }
    std::int64_t iteration() const noexcept { return iteration_; }
    /// Mean mirrored into the x box (the raw mean when unbounded).
    Vector representative() const;
    Rng& rng() noexcept { return rng_; }

private:
    const Problem& problem_;
    const InnerSolver& solver_;
    WraParams wra_;
    OuterOptions outer_opts_;
    Rng rng_;
    PopulationCma outer_;
    ScenarioPool pool_;
    std::vector<Vector> last_candidates_;
    WraOutcome last_outcome_;
    std::vector<double> best_history_;
    double best_F_;
    std::int64_t iteration_ = 0;
};

/// Adversarial CMA-ES approximation. Each iteration warm-starts two
/// (1+1)-CMA-ES runs of inner_budget_factor * dim steps from the current
/// (x, y) to approximate x_bar = argmin f(., y) and y_bar = argmax f(x, .),
/// then moves (x, y) += eta (x_bar - x, y_bar - y). eta grows by 1.1 (cap 1)
/// when the gap estimate G = f(x, y_bar) - f(x_bar, y) decreased, else
/// shrinks by 0.7 (floor eta_min).
class AdversarialCma {
public:
    using Function = std::function<double(std::span<const double>, std::span<const double>)>;

    AdversarialCma(const Function& f, std::int64_t cost_per_eval, const AdvCmaConfig& config, Vector x0, Vector y0,
                   double sigma_x, const SymMatrix& cov_x, double sigma_y, const SymMatrix& cov_y,
                   const BoxDomain* x_box, const BoxDomain* y_box);

    /// f-calls of one iteration.
    std::int64_t iteration_cost() const;
    /// One iteration; returns true when the restart condition fires.
    bool step(Rng& rng, FcallCounter& counter);

    const Vector& x() const noexcept { return x_; }
    const Vector& y() const noexcept { return y_; }
    double eta() const noexcept { return eta_; }
    double last_gap_estimate() const noexcept { return G_prev_; }
    double last_fxy() const noexcept { return fxy_; }

private:
    Function f_;
    std::int64_t cost_;
    AdvCmaConfig config_;
    Vector x_;
    Vector y_;
    const BoxDomain* x_box_;
    const BoxDomain* y_box_;
    ElitistCma es_x_;
    ElitistCma es_y_;
    double eta_;
    double G_prev_;
    double fxy_ = 0.0;
};

/// Uniform-sphere zeroth-order gradient estimate, q + 1 evaluations.
Vector zo_gradient(const Objective& f, std::span<const double> v, int q, double mu, Rng& rng,
                   FcallCounter* counter = nullptr);

TrialRecord run_wra(const Problem& problem, SolverKind kind, const WraParams& wra, const InnerSolverParams& inner,
                    const OuterOptions& outer, const RunOptions& options, std::uint64_t seed);

/// WRA runs restarted on internal termination until the budget is spent.
/// With local_search each terminated WRA run is followed by an Adversarial
/// CMA-ES local search on f_Y before restarting.
TrialRecord run_wra_with_restarts(const Problem& problem, SolverKind kind, const WraParams& wra,
                                  const InnerSolverParams& inner, const OuterOptions& outer, const AdvCmaConfig& adv,
                                  bool local_search, const RunOptions& options, std::uint64_t seed,
                                  RestartArchive* archive_out = nullptr);

/// Adversarial CMA-ES local search on f_Y(x, y) = max over {y} and the pool
/// scenarios, started from the terminated WRA state. Each f_Y evaluation
/// costs |Y| + 1 f-calls. Returns the final x of the segment.
struct HybridResult {
    Vector x;
    Vector y;
    std::int64_t iterations = 0;
    bool stopped_on_target = false;
};
HybridResult local_search_hybrid(const Problem& problem, const WraOptimizer& wra, SolverKind kind,
                                 const AdvCmaConfig& adv, Rng& rng, FcallCounter& counter, TraceLogger& logger,
                                 std::int64_t& iteration, int restarts);

TrialRecord run_adversarial_cmaes(const Problem& problem, const AdvCmaConfig& config, const RunOptions& options,
                                  std::uint64_t seed);

TrialRecord run_zopgda(const Problem& problem, const ZoPgdaConfig& config, const RunOptions& options,
                       std::uint64_t seed);

/// Dispatches on the algorithm id.
TrialRecord run_trial(const Problem& problem, const AlgorithmConfig& config, const RunOptions& options,
                      std::uint64_t seed);

} // namespace minmax
