#include "minmax/elitist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "minmax/cmaes.hpp"
#include "minmax/errors.hpp"

namespace minmax {

namespace {

constexpr double kSigmaMin = 1e-300;
constexpr double kSigmaMax = 1e300;

// Lower Cholesky factor; tiny or negative pivots are floored so a nearly
// singular covariance still yields a usable factor.
Matrix cholesky(const SymMatrix& s) {
    const std::size_t n = s.dim();
    Matrix l(n, n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, s(i, i));
    const double floor = 1e-300 + 1e-30 * scale;
    for (std::size_t j = 0; j < n; ++j) {
        double d = s(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        d = std::sqrt(std::max(d, floor));
        l(j, j) = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = s(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
            l(i, j) = v / d;
        }
    }
    return l;
}

bool better(double a, double b, Sense sense) {
    if (std::isnan(a)) return false;
    if (std::isnan(b)) return true;
    return sense == Sense::Minimize ? a < b : a > b;
}

} // namespace

ElitistCma::ElitistCma(Vector x0, double f0, double sigma0, const SymMatrix& cov0, std::optional<BoxDomain> domain)
    : x_(std::move(x0)), fx_(f0), sigma_(sigma0), cov_(cov0), domain_(std::move(domain)) {
    const std::size_t n = x_.size();
    if (n == 0) throw InvalidInput("ElitistCma: empty start point");
    if (cov_.dim() != n) throw InvalidInput("ElitistCma: covariance dimension mismatch");
    if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) throw InvalidInput("ElitistCma: step size must be positive");
    if (domain_ && domain_->dim() != n) throw InvalidInput("ElitistCma: domain dimension mismatch");
    const double dn = static_cast<double>(n);
    d_ = 1.0 + dn / 2.0;
    p_target_ = 2.0 / 11.0;
    c_p_ = 1.0 / 12.0;
    c_c_ = 2.0 / (dn + 2.0);
    c_cov_ = 2.0 / (dn * dn + 6.0);
    p_thresh_ = 0.44;
    p_succ_ = p_target_;
    pc_.assign(n, 0.0);
    refresh_factor();
}

void ElitistCma::refresh_factor() { chol_ = cholesky(cov_); }

double ElitistCma::effective_stddev() const {
    double m = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) m = std::max(m, std::sqrt(cov_(i, i)));
    return sigma_ * m;
}

bool ElitistCma::step(const Objective& f, Sense sense, Rng& rng, FcallCounter* counter) {
    const std::size_t n = dim();
    Vector z(n);
    for (auto& v : z) v = rng.normal();
    Vector offspring(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k <= i; ++k) s += chol_(i, k) * z[k];
        offspring[i] = x_[i] + sigma_ * s;
    }
    if (domain_) mirror_in_place(offspring, *domain_);
    const double fy = f(offspring);
    if (counter) counter->add(1);

    const bool success = better(fy, fx_, sense);
    p_succ_ = (1.0 - c_p_) * p_succ_ + c_p_ * (success ? 1.0 : 0.0);
    const double old_sigma = sigma_;

    if (success) {
        Vector step(n);
        for (std::size_t i = 0; i < n; ++i) step[i] = (offspring[i] - x_[i]) / old_sigma;
        x_ = std::move(offspring);
        fx_ = fy;
        if (p_succ_ < p_thresh_) {
            const double a = std::sqrt(c_c_ * (2.0 - c_c_));
            for (std::size_t i = 0; i < n; ++i) pc_[i] = (1.0 - c_c_) * pc_[i] + a * step[i];
            cov_.rank_one_update(1.0 - c_cov_, c_cov_, pc_);
        } else {
            for (auto& v : pc_) v *= (1.0 - c_c_);
            cov_.rank_one_update(1.0 - c_cov_ + c_cov_ * c_c_ * (2.0 - c_c_), c_cov_, pc_);
        }
        refresh_factor();
    }
    sigma_ *= std::exp((p_succ_ - p_target_) / (d_ * (1.0 - p_target_)));
    sigma_ = std::clamp(sigma_, kSigmaMin, kSigmaMax);
    return success;
}

void ElitistCma::relocate(Vector x, double fx) {
    if (x.size() != dim()) throw InvalidInput("ElitistCma::relocate: dimension mismatch");
    x_ = std::move(x);
    fx_ = fx;
}

MultistartResult multistart_maximize(const Objective& f, const BoxDomain& domain, int n_starts,
                                     std::int64_t budget_per_start, Rng& rng, FcallCounter* counter) {
    if (n_starts < 1) throw InvalidInput("multistart_maximize: n_starts must be at least 1");
    if (budget_per_start < 0) throw InvalidInput("multistart_maximize: negative budget");
    const std::size_t n = domain.dim();
    double width = 0.0;
    for (std::size_t i = 0; i < n; ++i) width = std::max(width, domain.width(i));
    const std::uint64_t key = rng.next_u64();

    MultistartResult best;
    best.value = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < n_starts; ++s) {
        Rng local = Rng::stream(key, static_cast<std::uint64_t>(s));
        Vector y0 = domain.sample_uniform(local);
        const double f0 = f(y0);
        if (counter) counter->add(1);
        ++best.evaluations;
        ElitistCma es(std::move(y0), f0, width / 4.0, SymMatrix::identity(n), domain);
        for (std::int64_t t = 0; t < budget_per_start; ++t) {
            es.step(f, Sense::Maximize, local, counter);
            ++best.evaluations;
            if (es.effective_stddev() < 1e-8 * width) break;
        }
        if (s == 0 || es.incumbent_value() > best.value) {
            best.y = es.incumbent();
            best.value = es.incumbent_value();
        }
    }
    return best;
}

} // namespace minmax
