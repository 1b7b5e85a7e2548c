#include "minmax/inner_solvers.hpp"

#include <algorithm>
#include <cmath>

#include "minmax/errors.hpp"

namespace minmax {

void InnerSolverParams::validate() const {
    if (c_max < 1) throw InvalidInput("c_max must be at least 1");
    if (!(v_min_y > 0.0)) throw InvalidInput("v_min_y must be positive");
    if (t_min < 0) throw InvalidInput("t_min must be non-negative");
    if (!(cond_max_y > 1.0)) throw InvalidInput("cond_max_y must exceed 1");
    if (!(u_min > 0.0)) throw InvalidInput("u_min must be positive");
    if (!(beta > 0.0 && beta < 1.0)) throw InvalidInput("beta must lie in (0, 1)");
    if (!(fd_step > 0.0)) throw InvalidInput("fd_step must be positive");
    if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw InvalidInput("eta0 must be positive and finite");
    if (lambda_y && *lambda_y < 2) throw InvalidInput("lambda_y must be at least 2");
}

Vector finite_difference_gradient(const Objective& objective, std::span<const double> y, double base_value,
                                  double step, FcallCounter* counter) {
    if (!(step > 0.0)) throw InvalidInput("finite_difference_gradient: step must be positive");
    const std::size_t n = y.size();
    Vector probe(y.begin(), y.end());
    Vector g(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double h = step * std::max(1.0, std::abs(y[i]));
        probe[i] = y[i] + h;
        const double fi = objective(probe);
        if (counter) counter->add(1);
        // use the representable step actually taken
        g[i] = (fi - base_value) / (probe[i] - y[i]);
        probe[i] = y[i];
    }
    return g;
}

void cma_inner_round(std::span<const double> x, InnerState& state, const InnerSolverParams& params,
                     const Problem& problem, Rng& rng, FcallCounter& counter) {
    InnerTheta& theta = state.theta;
    if (theta.h) return;
    auto& omega = std::get<InnerCmaConfig>(state.omega);
    if (!theta.engine) {
        std::optional<BoxDomain> box;
        if (problem.y_box()) box = *problem.y_box();
        theta.engine.emplace(omega.mean, omega.cov, std::move(box), params.lambda_y);
    }
    PopulationCma& es = *theta.engine;
    const SymMatrix cov_init = es.full_covariance();
    const std::size_t lam = es.lambda();
    Vector values(lam);

    int c = 0;
    while (c < params.c_max && !theta.h) {
        if (counter.exhausted()) break;
        const auto& cands = es.ask(rng);
        for (std::size_t k = 0; k < lam; ++k) values[k] = problem.evaluate(x, cands[k], counter);
        const auto order = rank_descending(values);
        const std::size_t best = order.front();
        if (values[best] > state.F) {
            state.F = values[best];
            state.y = cands[best];
            ++c;
        }
        es.tell(order);
        if (es.max_coordinate_stddev() < params.v_min_y && theta.t >= params.t_min) {
            Vector d(es.dim());
            for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::max(1.0, params.v_min_y / es.coordinate_stddev(i));
            es.scale_coordinates(d);
            theta.h = true;
        }
        if (es.condition() > params.cond_max_y) {
            theta.h = true;
            es.reset_distribution(es.mean(), cov_init);
        }
        ++theta.t;
    }
    omega.mean = es.mean();
    omega.cov = es.full_covariance();
}

void aga_inner_round(std::span<const double> x, InnerState& state, const InnerSolverParams& params,
                     const Problem& problem, FcallCounter& counter) {
    InnerTheta& theta = state.theta;
    if (theta.h) return;
    double& eta = std::get<AgaConfig>(state.omega).learning_rate;
    const BoxDomain* box = problem.y_box();
    const Objective f = [&](std::span<const double> y) { return problem.value(x, y); };
    const std::size_t n = state.y.size();
    Vector proposal(n);
    auto propose = [&](const Vector& g) {
        for (std::size_t i = 0; i < n; ++i) {
            double v = state.y[i] + eta * g[i];
            if (box) v = std::clamp(v, box->lower[i], box->upper[i]);
            proposal[i] = v;
        }
    };

    int c = 0;
    while (c < params.c_max && !theta.h) {
        if (counter.exhausted()) break;
        Vector g = finite_difference_gradient(f, state.y, state.F, params.fd_step, &counter);
        if (!all_finite(g)) {
            theta.h = true;
            break;
        }
        // drop components pushing against an active bound
        if (box)
            for (std::size_t i = 0; i < n; ++i)
                if ((state.y[i] >= box->upper[i] && g[i] > 0.0) || (state.y[i] <= box->lower[i] && g[i] < 0.0))
                    g[i] = 0.0;
        propose(g);
        double fp = problem.evaluate(x, proposal, counter);
        if (fp > state.F) {
            eta /= params.beta;
        } else {
            while (true) {
                eta *= params.beta;
                propose(g);
                if (eta * norm_inf(g) <= params.u_min) theta.h = true;
                fp = problem.evaluate(x, proposal, counter);
                if (fp > state.F || theta.h || counter.exhausted()) break;
            }
        }
        if (fp > state.F) {
            state.F = fp;
            state.y = proposal;
            ++c;
        }
    }
}

InnerCmaSolver::InnerCmaSolver(InnerSolverParams params) : params_(std::move(params)) { params_.validate(); }

std::pair<Vector, SolverConfig> InnerCmaSolver::draw_initial(const Problem& problem, Rng& rng) const {
    const BoxDomain& dom = problem.y_domain();
    Vector m = dom.sample_uniform(rng);
    const double sd = problem.by() / 2.0;
    SymMatrix cov = SymMatrix::identity(problem.dy(), sd * sd);
    Vector y = sample_gaussian(m, cov, rng);
    if (problem.y_box()) mirror_in_place(y, dom);
    return {std::move(y), InnerCmaConfig{std::move(m), std::move(cov)}};
}

void InnerCmaSolver::round(std::span<const double> x, InnerState& state, const Problem& problem, Rng& rng,
                           FcallCounter& counter) const {
    cma_inner_round(x, state, params_, problem, rng, counter);
}

AgaSolver::AgaSolver(InnerSolverParams params) : params_(std::move(params)) { params_.validate(); }

std::pair<Vector, SolverConfig> AgaSolver::draw_initial(const Problem& problem, Rng& rng) const {
    return {problem.y_domain().sample_uniform(rng), AgaConfig{params_.eta0}};
}

void AgaSolver::round(std::span<const double> x, InnerState& state, const Problem& problem, Rng&,
                      FcallCounter& counter) const {
    aga_inner_round(x, state, params_, problem, counter);
}

std::unique_ptr<InnerSolver> make_inner_solver(SolverKind kind, const InnerSolverParams& params) {
    if (kind == SolverKind::InnerCma) return std::make_unique<InnerCmaSolver>(params);
    return std::make_unique<AgaSolver>(params);
}

} // namespace minmax
