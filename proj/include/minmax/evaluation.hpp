#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "minmax/elitist.hpp"
#include "minmax/problems.hpp"
#include "minmax/record.hpp"

namespace minmax {

/// |F(z) - F*| <= tol.
bool judge_success(const Problem& problem, std::span<const double> z, double tol = 1e-6);

enum class CertifyKind { ClosedForm, Multistart };

struct CertifyProtocol {
    CertifyKind kind = CertifyKind::ClosedForm;
    int n_starts = 100;
    std::int64_t budget_per_start = 1000;
};

/// Worst-case value at x. ClosedForm uses the analytic worst scenario;
/// Multistart runs elitist CMA-ES restarts on f(x, .) and returns the best
/// value found, a lower bound of the true maximum.
double certify_worst_case(const Problem& problem, std::span<const double> x, const CertifyProtocol& protocol, Rng& rng,
                          FcallCounter* counter = nullptr);

/// Multistart certification for an arbitrary black box y -> f(x, y).
double certify_worst_case(const Objective& f_of_y, const BoxDomain& y_domain, const CertifyProtocol& protocol,
                          Rng& rng, FcallCounter* counter = nullptr);

/// Type-7 sample quantile (linear interpolation between order statistics).
/// NaN values are ignored; an empty sample gives NaN.
double quantile(std::span<const double> values, double p);

struct GapCurve {
    std::vector<std::int64_t> fcalls;
    Vector q25;
    Vector q50;
    Vector q75;
};

struct BatchSummary {
    std::string algorithm;
    ProblemSpec problem;
    int n_success = 0;
    int n_trials = 0;
    std::optional<double> median_fcalls;
    std::optional<double> q25_fcalls;
    std::optional<double> q75_fcalls;
    GapCurve curve;
};

/// Success count and f-call quartiles over the successful trials, plus gap
/// percentile curves on a shared f-call grid. Each trace is read as a step
/// function carrying its last observation forward. The grid is the union of
/// all logged f-call counts, thinned to at most max_grid_points log-spaced
/// points when larger.
BatchSummary aggregate(std::span<const TrialRecord> records, std::size_t max_grid_points = 512);

} // namespace minmax
