#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>

#include "minmax/numerics.hpp"
#include "minmax/problems.hpp"
#include "minmax/rng.hpp"

namespace minmax {

enum class Sense { Minimize, Maximize };

using Objective = std::function<double(std::span<const double>)>;

/// (1+1)-CMA-ES with smoothed success-rate step-size control and a
/// success-driven rank-one covariance update.
///   d = 1 + n/2, target success 2/11, c_p = 1/12, c_c = 2/(n+2),
///   c_cov = 2/(n^2+6), p_thresh = 0.44
/// Offspring are mirrored into the domain when one is set.
class ElitistCma {
public:
    ElitistCma(Vector x0, double f0, double sigma0, const SymMatrix& cov0, std::optional<BoxDomain> domain = std::nullopt);

    std::size_t dim() const noexcept { return x_.size(); }
    const Vector& incumbent() const noexcept { return x_; }
    double incumbent_value() const noexcept { return fx_; }
    double step_size() const noexcept { return sigma_; }
    const SymMatrix& cov() const noexcept { return cov_; }
    double success_prob() const noexcept { return p_succ_; }
    const Vector& search_path() const noexcept { return pc_; }
    /// step * max_i sqrt(C_ii)
    double effective_stddev() const;

    /// Samples one offspring and evaluates it (counter + 1 if given).
    /// Returns true when the offspring strictly improves on the incumbent.
    bool step(const Objective& f, Sense sense, Rng& rng, FcallCounter* counter = nullptr);

    /// Moves the incumbent, keeping step size, covariance and path.
    void relocate(Vector x, double fx);

private:
    void refresh_factor();

    Vector x_;
    double fx_;
    double sigma_;
    SymMatrix cov_;
    Matrix chol_;
    double p_succ_;
    Vector pc_;
    std::optional<BoxDomain> domain_;
    double d_, p_target_, c_p_, c_c_, c_cov_, p_thresh_;
};

struct MultistartResult {
    Vector y;
    double value = 0.0;
    std::int64_t evaluations = 0;
};

/// Best point over n_starts independent elitist runs from uniform starts in the
/// domain. Start s uses Rng::stream(key, s) with key drawn once from rng. Each
/// run stops after budget_per_start steps (not counting the start evaluation)
/// or when step * max sqrt(C_ii) < 1e-8 * box width.
MultistartResult multistart_maximize(const Objective& f, const BoxDomain& domain, int n_starts,
                                     std::int64_t budget_per_start, Rng& rng, FcallCounter* counter = nullptr);

} // namespace minmax
