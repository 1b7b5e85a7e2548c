#include <chrono>
#include <cmath>
#include <limits>

#include "minmax/drivers.hpp"
#include "minmax/errors.hpp"

namespace minmax {

namespace {

std::optional<BoxDomain> optional_box(const BoxDomain* b) {
    if (b) return *b;
    return std::nullopt;
}

void move_towards(Vector& v, const Vector& target, double eta, const BoxDomain* box) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += eta * (target[i] - v[i]);
    if (box) v = box->clip(v);
}

double sq_dist(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

} // namespace

AdversarialCma::AdversarialCma(const Function& f, std::int64_t cost_per_eval, const AdvCmaConfig& config, Vector x0,
                               Vector y0, double sigma_x, const SymMatrix& cov_x, double sigma_y,
                               const SymMatrix& cov_y, const BoxDomain* x_box, const BoxDomain* y_box)
    : f_(f), cost_(cost_per_eval), config_(config), x_(std::move(x0)), y_(std::move(y0)), x_box_(x_box),
      y_box_(y_box), es_x_(x_, 0.0, sigma_x, cov_x, optional_box(x_box)),
      es_y_(y_, 0.0, sigma_y, cov_y, optional_box(y_box)), eta_(config.eta0),
      G_prev_(std::numeric_limits<double>::infinity()) {
    config_.validate();
    if (cost_ < 1) throw InvalidInput("cost_per_eval must be at least 1");
}

std::int64_t AdversarialCma::iteration_cost() const {
    const auto steps = static_cast<std::int64_t>(config_.inner_budget_factor) *
                       static_cast<std::int64_t>(x_.size() + y_.size());
    return cost_ * (1 + steps);
}

bool AdversarialCma::step(Rng& rng, FcallCounter& counter) {
    fxy_ = f_(x_, y_);
    counter.add(cost_);

    const Vector y_fixed = y_;
    const Objective gx = [&](std::span<const double> x) {
        counter.add(cost_);
        return f_(x, y_fixed);
    };
    es_x_.relocate(x_, fxy_);
    const int nx = config_.inner_budget_factor * static_cast<int>(x_.size());
    for (int s = 0; s < nx; ++s) es_x_.step(gx, Sense::Minimize, rng, nullptr);

    const Vector x_fixed = x_;
    const Objective gy = [&](std::span<const double> y) {
        counter.add(cost_);
        return f_(x_fixed, y);
    };
    es_y_.relocate(y_, fxy_);
    const int ny = config_.inner_budget_factor * static_cast<int>(y_.size());
    for (int s = 0; s < ny; ++s) es_y_.step(gy, Sense::Maximize, rng, nullptr);

    const double G = es_y_.incumbent_value() - es_x_.incumbent_value();
    if (G < G_prev_)
        eta_ = std::min(1.0, 1.1 * eta_);
    else
        eta_ = std::max(config_.eta_min, 0.7 * eta_);
    G_prev_ = G;

    const Vector& xb = es_x_.incumbent();
    const Vector& yb = es_y_.incumbent();
    const double move = eta_ * eta_ * (sq_dist(xb, x_) + sq_dist(yb, y_));
    const bool restart = move < config_.g_tol || es_x_.effective_stddev() < config_.sigma_min ||
                         es_y_.effective_stddev() < config_.sigma_min;
    move_towards(x_, xb, eta_, x_box_);
    move_towards(y_, yb, eta_, y_box_);
    return restart;
}

TrialRecord run_adversarial_cmaes(const Problem& problem, const AdvCmaConfig& config, const RunOptions& options,
                                  std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    TrialRecord rec;
    rec.seed = seed;
    rec.algorithm = "adv-cma";
    rec.problem = problem.spec();
    rec.budget = options.budget;
    config.validate();

    Rng rng(seed);
    FcallCounter counter(options.budget);
    TraceLogger logger(problem, options, rec, true);
    const AdversarialCma::Function f = [&problem](std::span<const double> x, std::span<const double> y) {
        return problem.value(x, y);
    };
    Vector sdx(problem.dx());
    for (std::size_t i = 0; i < sdx.size(); ++i) {
        const double s = problem.x_domain().width(i) / 4.0;
        sdx[i] = s * s;
    }
    const SymMatrix cov_x = SymMatrix::diagonal(sdx);
    const double sy = problem.by() / 2.0;
    const SymMatrix cov_y = SymMatrix::identity(problem.dy(), sy * sy);
    auto fresh = [&] {
        Vector x0 = problem.x_domain().sample_uniform(rng);
        Vector y0 = problem.y_domain().sample_uniform(rng);
        return AdversarialCma(f, 1, config, std::move(x0), std::move(y0), 1.0, cov_x, 1.0, cov_y, problem.x_box(),
                              problem.y_box());
    };

    AdversarialCma engine = fresh();
    std::string reason = "BudgetExhausted";
    std::int64_t iteration = 0;
    int restarts = 0;
    Vector last_x = engine.x();
    if (logger.log(0, 0, engine.x(), std::numeric_limits<double>::quiet_NaN(), 0)) {
        reason = "TargetReached";
    } else {
        while (counter.count() + engine.iteration_cost() <= options.budget) {
            const bool restart = engine.step(rng, counter);
            ++iteration;
            if (!all_finite(engine.x()) || !all_finite(engine.y())) {
                reason = "Diverged";
                break;
            }
            last_x = engine.x();
            if (logger.log(counter.count(), iteration, engine.x(), engine.last_fxy(), restarts)) {
                reason = "TargetReached";
                break;
            }
            if (restart) {
                ++restarts;
                rec.restarts = restarts;
                engine = fresh();
            }
        }
    }
    logger.finish(counter.count(), last_x, reason);
    rec.restarts = restarts;
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

} // namespace minmax
