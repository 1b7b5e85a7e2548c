#include <chrono>
#include <cmath>
#include <limits>

#include "minmax/drivers.hpp"
#include "minmax/errors.hpp"

namespace minmax {

Vector zo_gradient(const Objective& f, std::span<const double> v, int q, double mu, Rng& rng, FcallCounter* counter) {
    if (q < 1) throw InvalidInput("zo_gradient: q must be at least 1");
    if (!(mu > 0.0)) throw InvalidInput("zo_gradient: mu must be positive");
    const std::size_t d = v.size();
    const double base = f(v);
    if (counter) counter->add(1);
    Vector g(d, 0.0);
    Vector u(d);
    Vector probe(d);
    for (int j = 0; j < q; ++j) {
        double nrm = 0.0;
        do {
            for (auto& ui : u) ui = rng.normal();
            nrm = norm2(u);
        } while (nrm == 0.0);
        for (std::size_t i = 0; i < d; ++i) {
            u[i] /= nrm;
            probe[i] = v[i] + mu * u[i];
        }
        const double fv = f(probe);
        if (counter) counter->add(1);
        const double w = static_cast<double>(d) * (fv - base) / (mu * static_cast<double>(q));
        for (std::size_t i = 0; i < d; ++i) g[i] += w * u[i];
    }
    return g;
}

TrialRecord run_zopgda(const Problem& problem, const ZoPgdaConfig& config, const RunOptions& options,
                       std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    TrialRecord rec;
    rec.seed = seed;
    rec.algorithm = "zopgda";
    rec.problem = problem.spec();
    rec.budget = options.budget;
    config.validate();

    Rng rng(seed);
    FcallCounter counter(options.budget);
    TraceLogger logger(problem, options, rec, true);
    const BoxDomain* xb = problem.x_box();
    const BoxDomain* yb = problem.y_box();

    Vector x = problem.x_domain().sample_uniform(rng);
    Vector y = problem.y_domain().sample_uniform(rng);
    const std::int64_t cost = 2 * (config.q + 1);
    std::string reason = "BudgetExhausted";
    std::int64_t iteration = 0;
    int restarts = 0;
    Vector last_x = x;

    if (logger.log(0, 0, x, std::numeric_limits<double>::quiet_NaN(), 0)) {
        reason = "TargetReached";
    } else {
        while (counter.count() + cost <= options.budget) {
            const Vector y_fixed = y;
            const Vector x_fixed = x;
            double fxy = std::numeric_limits<double>::quiet_NaN();
            const Objective fx = [&](std::span<const double> v) { return problem.value(v, y_fixed); };
            const Objective fy = [&](std::span<const double> v) {
                const double r = problem.value(x_fixed, v);
                if (std::isnan(fxy)) fxy = r;
                return r;
            };
            const Vector gx = zo_gradient(fx, x, config.q, config.mu, rng, &counter);
            const Vector gy = zo_gradient(fy, y, config.q, config.mu, rng, &counter);
            double step_sq = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double s = config.eta_x * gx[i];
                x[i] -= s;
                step_sq += s * s;
            }
            for (std::size_t i = 0; i < y.size(); ++i) {
                const double s = config.eta_y * gy[i];
                y[i] += s;
                step_sq += s * s;
            }
            if (xb) x = xb->clip(x);
            if (yb) y = yb->clip(y);
            ++iteration;
            if (!all_finite(x) || !all_finite(y)) {
                reason = "Diverged";
                break;
            }
            last_x = x;
            if (logger.log(counter.count(), iteration, x, fxy, restarts)) {
                reason = "TargetReached";
                break;
            }
            if (config.restart && step_sq <= config.restart_tol) {
                ++restarts;
                rec.restarts = restarts;
                x = problem.x_domain().sample_uniform(rng);
                y = problem.y_domain().sample_uniform(rng);
            }
        }
    }
    logger.finish(counter.count(), last_x, reason);
    rec.restarts = restarts;
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

} // namespace minmax
