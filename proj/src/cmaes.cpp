#include "minmax/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "minmax/errors.hpp"

namespace minmax {

double mirror_coordinate(double x, double lo, double hi) {
    if (x >= lo && x <= hi) return x;
    const double w = hi - lo;
    const double period = 2.0 * w;
    double t = std::fmod(x - lo, period);
    if (t < 0.0) t += period;
    if (t > w) t = period - t;
    return std::clamp(lo + t, lo, hi);
}

Vector mirror_into_box(std::span<const double> x, const BoxDomain& domain) {
    Vector out(x.begin(), x.end());
    mirror_in_place(out, domain);
    return out;
}

void mirror_in_place(std::span<double> x, const BoxDomain& domain) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = mirror_coordinate(x[i], domain.lower[i], domain.upper[i]);
}

namespace {

std::vector<std::size_t> rank_impl(std::span<const double> values, bool descending) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double va = values[a];
        const double vb = values[b];
        const bool na = std::isnan(va);
        const bool nb = std::isnan(vb);
        if (na || nb) return !na && nb;
        return descending ? va > vb : va < vb;
    });
    return order;
}

} // namespace

std::vector<std::size_t> rank_ascending(std::span<const double> values) { return rank_impl(values, false); }
std::vector<std::size_t> rank_descending(std::span<const double> values) { return rank_impl(values, true); }

std::size_t default_population_size(std::size_t dim) {
    return 4 + static_cast<std::size_t>(std::floor(3.0 * std::log(static_cast<double>(dim))));
}

CmaStrategyParams CmaStrategyParams::defaults(std::size_t dim, std::size_t lambda) {
    CmaStrategyParams p;
    const double n = static_cast<double>(dim);
    p.lambda = lambda;
    p.mu = lambda / 2;
    p.weights.resize(p.mu);
    for (std::size_t i = 0; i < p.mu; ++i)
        p.weights[i] = std::log((static_cast<double>(lambda) + 1.0) / 2.0) - std::log(static_cast<double>(i + 1));
    const double sum = std::accumulate(p.weights.begin(), p.weights.end(), 0.0);
    for (auto& w : p.weights) w /= sum;
    p.mueff = 1.0 / dot(p.weights, p.weights);
    p.cc = (4.0 + p.mueff / n) / (n + 4.0 + 2.0 * p.mueff / n);
    p.cs = (p.mueff + 2.0) / (n + p.mueff + 5.0);
    p.c1 = 2.0 / ((n + 1.3) * (n + 1.3) + p.mueff);
    p.cmu = std::min(1.0 - p.c1, 2.0 * (p.mueff - 2.0 + 1.0 / p.mueff) / ((n + 2.0) * (n + 2.0) + p.mueff));
    p.ds = 1.0 + 2.0 * std::max(0.0, std::sqrt((p.mueff - 1.0) / (n + 1.0)) - 1.0) + p.cs;
    p.chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
    return p;
}

PopulationCma::PopulationCma(Vector mean0, const SymMatrix& cov0, std::optional<BoxDomain> domain,
                             std::optional<std::size_t> lambda, double step_size)
    : mean_(std::move(mean0)), cov_(cov0), sigma_(step_size), domain_(std::move(domain)) {
    const std::size_t n = mean_.size();
    if (n == 0) throw InvalidInput("PopulationCma: empty mean");
    if (cov_.dim() != n) throw InvalidInput("PopulationCma: covariance dimension mismatch");
    if (!all_finite(mean_)) throw InvalidInput("PopulationCma: non-finite mean");
    if (!(step_size > 0.0) || !std::isfinite(step_size)) throw InvalidInput("PopulationCma: step size must be positive");
    if (domain_ && domain_->dim() != n) throw InvalidInput("PopulationCma: domain dimension mismatch");
    const std::size_t lam = lambda.value_or(default_population_size(n));
    if (lam < 2) throw InvalidInput("PopulationCma: population size must be at least 2");
    eig_ = eigh(cov_);
    if (!(eig_.values.front() > 0.0)) throw InvalidInput("PopulationCma: initial covariance is not positive definite");
    params_ = CmaStrategyParams::defaults(n, lam);
    ps_.assign(n, 0.0);
    pc_.assign(n, 0.0);
    if (domain_) {
        caps_.resize(n);
        for (std::size_t i = 0; i < n; ++i) caps_[i] = domain_->width(i) / 2.0;
    }
    raw_.assign(lam, Vector(n));
    candidates_.assign(lam, Vector(n));
}

SymMatrix PopulationCma::full_covariance() const {
    SymMatrix s = cov_;
    s.scale(sigma_ * sigma_);
    return s;
}

double PopulationCma::coordinate_stddev(std::size_t i) const { return sigma_ * std::sqrt(cov_(i, i)); }

double PopulationCma::max_coordinate_stddev() const {
    double m = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) m = std::max(m, coordinate_stddev(i));
    return m;
}

double PopulationCma::condition() const { return condition_number(eig_); }

const std::vector<Vector>& PopulationCma::ask(Rng& rng) {
    const std::size_t n = dim();
    Vector scaled(n);
    for (std::size_t k = 0; k < params_.lambda; ++k) {
        for (std::size_t j = 0; j < n; ++j) scaled[j] = std::sqrt(std::max(0.0, eig_.values[j])) * rng.normal();
        Vector& x = raw_[k];
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += eig_.vectors(i, j) * scaled[j];
            x[i] = mean_[i] + sigma_ * s;
        }
        candidates_[k] = x;
        if (domain_) mirror_in_place(candidates_[k], *domain_);
    }
    pending_ = true;
    return candidates_;
}

void PopulationCma::tell(std::span<const std::size_t> order) {
    if (!pending_) throw ProtocolViolation("tell called without a preceding ask");
    const std::size_t lam = params_.lambda;
    if (order.size() != lam) throw InvalidInput("tell: ranking length differs from the population size");
    std::vector<char> seen(lam, 0);
    for (std::size_t idx : order) {
        if (idx >= lam || seen[idx]) throw InvalidInput("tell: ranking is not a permutation");
        seen[idx] = 1;
    }
    pending_ = false;

    const std::size_t n = dim();
    const auto& p = params_;
    const Vector old_mean = mean_;

    // mean shift in units of sigma
    Vector shift(n, 0.0);
    for (std::size_t r = 0; r < p.mu; ++r) {
        const Vector& x = raw_[order[r]];
        for (std::size_t i = 0; i < n; ++i) shift[i] += p.weights[r] * (x[i] - old_mean[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        mean_[i] = old_mean[i] + shift[i];
        shift[i] /= sigma_;
    }

    // C^{-1/2} shift
    Vector tmp(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += eig_.vectors(i, j) * shift[i];
        tmp[j] = s / std::sqrt(std::max(eig_.values[j], 1e-300));
    }
    Vector whitened(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += eig_.vectors(i, j) * tmp[j];
        whitened[i] = s;
    }

    const double cs_factor = std::sqrt(p.cs * (2.0 - p.cs) * p.mueff);
    for (std::size_t i = 0; i < n; ++i) ps_[i] = (1.0 - p.cs) * ps_[i] + cs_factor * whitened[i];
    const double ps_norm = norm2(ps_);
    // expected squared path lengths under random selection, zero at start
    gamma_s_ = (1.0 - p.cs) * (1.0 - p.cs) * gamma_s_ + p.cs * (2.0 - p.cs);
    const double ps_rel = ps_norm / std::sqrt(gamma_s_);
    const bool hsig = ps_rel < (1.4 + 2.0 / (static_cast<double>(n) + 1.0)) * p.chi_n;

    const double cc_factor = std::sqrt(p.cc * (2.0 - p.cc) * p.mueff);
    for (std::size_t i = 0; i < n; ++i) pc_[i] = (1.0 - p.cc) * pc_[i] + (hsig ? cc_factor * shift[i] : 0.0);

    gamma_c_ = (1.0 - p.cc) * (1.0 - p.cc) * gamma_c_ + (hsig ? p.cc * (2.0 - p.cc) : 0.0);
    const double decay = 1.0 - p.c1 * gamma_c_ - p.cmu;
    cov_.rank_one_update(decay, p.c1, pc_);
    Vector y(n);
    for (std::size_t r = 0; r < p.mu; ++r) {
        const Vector& x = raw_[order[r]];
        for (std::size_t i = 0; i < n; ++i) y[i] = (x[i] - old_mean[i]) / sigma_;
        cov_.rank_one_update(1.0, p.cmu * p.weights[r], y);
    }

    sigma_ *= std::exp(std::min(1.0, (p.cs / p.ds) * (ps_rel / p.chi_n - 1.0)));
    if (domain_) mirror_in_place(mean_, *domain_);
    ++iteration_;
    refresh_eigen();
    if (domain_) cap_coordinate_stddev(caps_);
}

void PopulationCma::refresh_eigen() {
    eig_ = eigh(cov_);
    const double top = eig_.values.back();
    const double floor = 1e-30 * top;
    bool changed = false;
    for (auto& v : eig_.values)
        if (v < floor) {
            v = floor;
            changed = true;
        }
    if (changed) cov_ = reconstruct(eig_);
}

void PopulationCma::cap_coordinate_stddev(std::span<const double> caps) {
    const std::size_t n = dim();
    Vector factors(n, 1.0);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        const double sd = coordinate_stddev(i);
        if (sd > caps[i]) {
            factors[i] = caps[i] / sd;
            any = true;
        }
    }
    if (any) scale_coordinates(factors);
}

void PopulationCma::scale_coordinates(std::span<const double> factors) {
    cov_.scale_coordinates(factors);
    refresh_eigen();
}

void PopulationCma::reset_distribution(std::span<const double> mean, const SymMatrix& full_cov) {
    mean_.assign(mean.begin(), mean.end());
    cov_ = full_cov;
    sigma_ = 1.0;
    std::fill(ps_.begin(), ps_.end(), 0.0);
    std::fill(pc_.begin(), pc_.end(), 0.0);
    gamma_s_ = 0.0;
    gamma_c_ = 0.0;
    refresh_eigen();
}

std::optional<TerminationReason> PopulationCma::should_terminate(double v_min, double cond_max) const {
    if (max_coordinate_stddev() < v_min) return TerminationReason::StdDevConverged;
    if (!(eig_.values.front() > 0.0) || eig_.values.back() / eig_.values.front() > cond_max)
        return TerminationReason::IllConditioned;
    return std::nullopt;
}

} // namespace minmax
