#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "minmax/numerics.hpp"
#include "minmax/problems.hpp"
#include "minmax/rng.hpp"

namespace minmax {

/// Reflects each coordinate at the box walls (period 2(u - l)) until inside.
/// Interior points are returned unchanged, so mirroring is idempotent.
double mirror_coordinate(double x, double lo, double hi);
Vector mirror_into_box(std::span<const double> x, const BoxDomain& domain);
void mirror_in_place(std::span<double> x, const BoxDomain& domain);

/// Ascending ranking permutation (order[0] = smallest). Ties keep index order
/// and NaN always ranks last.
std::vector<std::size_t> rank_ascending(std::span<const double> values);
/// Descending ranking (order[0] = largest), same tie and NaN rules.
std::vector<std::size_t> rank_descending(std::span<const double> values);

/// 4 + floor(3 ln n)
std::size_t default_population_size(std::size_t dim);

enum class TerminationReason { StdDevConverged, IllConditioned };

struct CmaStrategyParams {
    std::size_t lambda = 0;
    std::size_t mu = 0;
    Vector weights;
    double mueff = 0.0;
    double cs = 0.0;
    double ds = 0.0;
    double cc = 0.0;
    double c1 = 0.0;
    double cmu = 0.0;
    double chi_n = 0.0;

    static CmaStrategyParams defaults(std::size_t dim, std::size_t lambda);
};

/// Population CMA-ES with rank-one and rank-mu updates and cumulative
/// step-size adaptation. The search distribution is N(mean, step^2 * cov).
///
/// ask() returns candidates mirrored into the domain; the raw samples are
/// kept and used by tell(). With a domain the updated mean is mirrored back
/// into the box and the coordinate stddev is capped at half the box width
/// after every tell. tell() consumes only a ranking. The evolution paths
/// are normalized by their expected length under random selection, so a
/// fresh state neither shrinks nor grows on average during the first steps.
class PopulationCma {
public:
    PopulationCma(Vector mean0, const SymMatrix& cov0, std::optional<BoxDomain> domain = std::nullopt,
                  std::optional<std::size_t> lambda = std::nullopt, double step_size = 1.0);

    std::size_t dim() const noexcept { return mean_.size(); }
    std::size_t lambda() const noexcept { return params_.lambda; }
    std::size_t iteration() const noexcept { return iteration_; }
    const Vector& mean() const noexcept { return mean_; }
    const SymMatrix& cov() const noexcept { return cov_; }
    double step_size() const noexcept { return sigma_; }
    const Vector& path_sigma() const noexcept { return ps_; }
    const Vector& path_cov() const noexcept { return pc_; }
    const CmaStrategyParams& params() const noexcept { return params_; }
    const std::optional<BoxDomain>& domain() const noexcept { return domain_; }
    const EigenDecomposition& eigen() const noexcept { return eig_; }

    /// step^2 * cov
    SymMatrix full_covariance() const;
    double coordinate_stddev(std::size_t i) const;
    double max_coordinate_stddev() const;
    double condition() const;

    const std::vector<Vector>& ask(Rng& rng);
    const std::vector<Vector>& candidates() const noexcept { return candidates_; }
    const std::vector<Vector>& raw_samples() const noexcept { return raw_; }

    /// order[r] is the index of the candidate with rank r (order[0] = best).
    void tell(std::span<const std::size_t> order);

    /// Rescales row/column i of cov so that step * sqrt(cov_ii) <= caps[i].
    void cap_coordinate_stddev(std::span<const double> caps);
    /// cov = D cov D with D = diag(factors).
    void scale_coordinates(std::span<const double> factors);
    /// Replaces the distribution with N(mean, full_cov) at step 1 and clears the paths.
    void reset_distribution(std::span<const double> mean, const SymMatrix& full_cov);

    std::optional<TerminationReason> should_terminate(double v_min, double cond_max) const;

private:
    void refresh_eigen();

    CmaStrategyParams params_;
    Vector mean_;
    SymMatrix cov_;
    double sigma_ = 1.0;
    Vector ps_;
    Vector pc_;
    double gamma_s_ = 0.0;
    double gamma_c_ = 0.0;
    std::size_t iteration_ = 0;
    std::optional<BoxDomain> domain_;
    Vector caps_;
    EigenDecomposition eig_;
    std::vector<Vector> raw_;
    std::vector<Vector> candidates_;
    bool pending_ = false;
};

} // namespace minmax
