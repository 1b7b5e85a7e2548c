#pragma once

#include <memory>
#include <optional>
#include <variant>

#include "minmax/cmaes.hpp"
#include "minmax/elitist.hpp"
#include "minmax/problems.hpp"

namespace minmax {

enum class SolverKind { InnerCma, Aga };

struct InnerSolverParams {
    int c_max = 1;
    double v_min_y = 1e-4;
    int t_min = 10;
    double cond_max_y = 1e14;
    double u_min = 1e-5;
    double beta = 0.5;
    double fd_step = 1.49e-8;
    double eta0 = 1.0;
    std::optional<std::size_t> lambda_y; // default 4 + floor(3 ln d_y)

    void validate() const; // throws InvalidInput
};

/// Inherited configuration of the inner CMA-ES: N(mean, cov), step size folded into cov.
struct InnerCmaConfig {
    Vector mean;
    SymMatrix cov;
};

/// Inherited configuration of AGA: the learning rate.
struct AgaConfig {
    double learning_rate = 1.0;
};

using SolverConfig = std::variant<InnerCmaConfig, AgaConfig>;

/// Per-call solver state, re-initialized at every WRA call.
struct InnerTheta {
    bool h = false;
    int t = 0;
    std::optional<PopulationCma> engine; // inner CMA only
};

/// One candidate's inner maximization state within a WRA call.
struct InnerState {
    Vector y;
    double F = 0.0;
    SolverConfig omega;
    InnerTheta theta;
};

/// Forward differences with per-coordinate step step * max(1, |y_i|). Exactly
/// dim(y) evaluations; base_value must equal objective(y).
Vector finite_difference_gradient(const Objective& objective, std::span<const double> y, double base_value,
                                  double step, FcallCounter* counter = nullptr);

/// One inner CMA-ES round: runs until c_max strict improvements or h is set.
/// Every loop iteration costs lambda_y f-calls. Stops early once the counter is exhausted.
void cma_inner_round(std::span<const double> x, InnerState& state, const InnerSolverParams& params,
                     const Problem& problem, Rng& rng, FcallCounter& counter);

/// One AGA round: projected finite-difference ascent with backtracking.
void aga_inner_round(std::span<const double> x, InnerState& state, const InnerSolverParams& params,
                     const Problem& problem, FcallCounter& counter);

class InnerSolver {
public:
    virtual ~InnerSolver() = default;
    virtual SolverKind kind() const = 0;
    /// Initial (scenario, configuration) pair drawn from the original init spec.
    virtual std::pair<Vector, SolverConfig> draw_initial(const Problem& problem, Rng& rng) const = 0;
    virtual InnerTheta fresh_theta() const { return {}; }
    virtual void round(std::span<const double> x, InnerState& state, const Problem& problem, Rng& rng,
                       FcallCounter& counter) const = 0;
};

class InnerCmaSolver : public InnerSolver {
public:
    explicit InnerCmaSolver(InnerSolverParams params);
    SolverKind kind() const override { return SolverKind::InnerCma; }
    std::pair<Vector, SolverConfig> draw_initial(const Problem& problem, Rng& rng) const override;
    void round(std::span<const double> x, InnerState& state, const Problem& problem, Rng& rng,
               FcallCounter& counter) const override;
    const InnerSolverParams& params() const noexcept { return params_; }

private:
    InnerSolverParams params_;
};

class AgaSolver : public InnerSolver {
public:
    explicit AgaSolver(InnerSolverParams params);
    SolverKind kind() const override { return SolverKind::Aga; }
    std::pair<Vector, SolverConfig> draw_initial(const Problem& problem, Rng& rng) const override;
    void round(std::span<const double> x, InnerState& state, const Problem& problem, Rng& rng,
               FcallCounter& counter) const override;
    const InnerSolverParams& params() const noexcept { return params_; }

private:
    InnerSolverParams params_;
};

std::unique_ptr<InnerSolver> make_inner_solver(SolverKind kind, const InnerSolverParams& params);

} // namespace minmax
