#include "minmax/drivers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "minmax/errors.hpp"

namespace minmax {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SymMatrix initial_outer_cov(const BoxDomain& dom) {
    Vector d(dom.dim());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (dom.width(i) / 4.0) * (dom.width(i) / 4.0);
    return SymMatrix::diagonal(d);
}

std::optional<BoxDomain> optional_box(const BoxDomain* b) {
    if (b) return *b;
    return std::nullopt;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

// ------------------------------------------------------------ identifiers

std::string to_string(Algorithm a) {
    switch (a) {
    case Algorithm::WraCma: return "wra-cma";
    case Algorithm::WraAga: return "wra-aga";
    case Algorithm::WraCmaAdv: return "wra-cma+adv";
    case Algorithm::WraAgaAdv: return "wra-aga+adv";
    case Algorithm::AdvCma: return "adv-cma";
    case Algorithm::ZoPgda: return "zopgda";
    }
    return "?";
}

Algorithm parse_algorithm(std::string_view s) {
    for (auto a : {Algorithm::WraCma, Algorithm::WraAga, Algorithm::WraCmaAdv, Algorithm::WraAgaAdv, Algorithm::AdvCma,
                   Algorithm::ZoPgda})
        if (s == to_string(a)) return a;
    throw InvalidInput("unknown algorithm '" + std::string(s) + "'");
}

bool is_wra(Algorithm a) { return a != Algorithm::AdvCma && a != Algorithm::ZoPgda; }

SolverKind solver_kind(Algorithm a) {
    return (a == Algorithm::WraAga || a == Algorithm::WraAgaAdv) ? SolverKind::Aga : SolverKind::InnerCma;
}

void OuterOptions::validate() const {
    if (!(v_min_x > 0.0)) throw InvalidInput("v_min_x must be positive");
    if (!(cond_max_x > 1.0)) throw InvalidInput("cond_max_x must exceed 1");
    if (lambda_x && *lambda_x < 2) throw InvalidInput("lambda_x must be at least 2");
    if (n_omega < 1) throw InvalidInput("n_omega must be at least 1");
    if (stagnation_window < 1) throw InvalidInput("stagnation_window must be at least 1");
}

void AdvCmaConfig::validate() const {
    if (!(g_tol > 0.0)) throw InvalidInput("g_tol must be positive");
    if (!(eta_min > 0.0 && eta_min <= 1.0)) throw InvalidInput("eta_min must lie in (0, 1]");
    if (!(sigma_min > 0.0)) throw InvalidInput("sigma_min must be positive");
    if (!(eta0 >= eta_min && eta0 <= 1.0)) throw InvalidInput("eta0 must lie in [eta_min, 1]");
    if (inner_budget_factor < 1) throw InvalidInput("inner_budget_factor must be at least 1");
}

void ZoPgdaConfig::validate() const {
    if (!(eta_x > 0.0) || !(eta_y > 0.0)) throw InvalidInput("eta_x and eta_y must be positive");
    if (q < 1) throw InvalidInput("q must be at least 1");
    if (!(mu > 0.0)) throw InvalidInput("mu must be positive");
    if (!(restart_tol > 0.0)) throw InvalidInput("restart_tol must be positive");
}

// ------------------------------------------------------------ TraceLogger

TraceLogger::TraceLogger(const Problem& problem, const RunOptions& options, TrialRecord& record, bool thin)
    : problem_(problem), options_(options), record_(record), thin_(thin),
      best_gap_(std::numeric_limits<double>::infinity()) {}

void TraceLogger::push(const TraceRow& row) {
    if (!record_.trace.empty() && row.fcalls <= record_.trace.back().fcalls) return;
    record_.trace.push_back(row);
}

bool TraceLogger::log(std::int64_t fcalls, std::int64_t iteration, std::span<const double> z, double best_approx_F,
                      int restarts) {
    const double gap = problem_.gap(z);
    if (gap < best_gap_ || std::isnan(best_gap_)) best_gap_ = gap;
    record_.best_gap = best_gap_;
    record_.iterations = iteration;
    const TraceRow row{fcalls, iteration, gap, best_approx_F, restarts};
    const bool hit = !record_.success && gap <= options_.target_gap;
    if (hit) {
        record_.success = true;
        record_.fcalls_to_success = fcalls;
    }
    bool keep = !thin_ || record_.trace.empty() || hit;
    if (!keep) {
        const auto last = record_.trace.back().fcalls;
        keep = static_cast<double>(fcalls) >= 1.01 * static_cast<double>(last) && fcalls > last;
    }
    if (keep) {
        push(row);
        pending_.reset();
    } else {
        pending_ = row;
    }
    return record_.success && options_.stop_on_target;
}

void TraceLogger::finish(std::int64_t fcalls, std::span<const double> final_x, const std::string& reason) {
    if (pending_) push(*pending_);
    pending_.reset();
    record_.fcalls_used = fcalls;
    record_.final_x.assign(final_x.begin(), final_x.end());
    record_.final_gap = problem_.gap(final_x);
    record_.stop_reason = reason;
}

// ------------------------------------------------------------ archive pick

ArchivePick pick_from_archive(const Problem& problem, const RestartArchive& archive, int random_scenarios, Rng& rng) {
    if (archive.X_star.empty()) throw InvalidInput("pick_from_archive: empty solution archive");
    std::vector<Vector> scenarios = archive.Y_star;
    for (int r = 0; r < random_scenarios; ++r) scenarios.push_back(problem.y_domain().sample_uniform(rng));
    if (scenarios.empty()) throw InvalidInput("pick_from_archive: empty scenario archive");
    FcallCounter cert;
    ArchivePick pick;
    pick.value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < archive.X_star.size(); ++i) {
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& y : scenarios) worst = std::max(worst, problem.evaluate(archive.X_star[i], y, cert));
        if (i == 0 || worst < pick.value) {
            pick.value = worst;
            pick.index = i;
        }
    }
    pick.x = archive.X_star[pick.index];
    pick.certification_fcalls = cert.count();
    return pick;
}

// ------------------------------------------------------------ WraOptimizer

WraOptimizer::WraOptimizer(const Problem& problem, const InnerSolver& solver, const WraParams& wra,
                           const OuterOptions& outer, std::uint64_t seed)
    : problem_(problem), solver_(solver), wra_(wra), outer_opts_(outer), rng_(seed),
      outer_(problem.x_domain().sample_uniform(rng_), initial_outer_cov(problem.x_domain()),
             optional_box(problem.x_box()), outer.lambda_x),
      pool_(pool_init(outer.n_omega, problem, solver, rng_)), best_F_(kNaN) {
    wra_.validate();
    outer_opts_.validate();
}

std::int64_t WraOptimizer::warm_start_cost() const {
    return static_cast<std::int64_t>(outer_.lambda() * pool_.size());
}

Vector WraOptimizer::representative() const {
    if (problem_.x_box()) return mirror_into_box(outer_.mean(), *problem_.x_box());
    return outer_.mean();
}

std::optional<std::string> WraOptimizer::step(FcallCounter& counter) {
    last_candidates_ = outer_.ask(rng_);
    last_outcome_ = wra_approximate(pool_, last_candidates_, wra_, solver_, problem_, rng_, counter);
    outer_.tell(last_outcome_.rankings);
    ++iteration_;
    best_F_ = *std::min_element(last_outcome_.approx_values.begin(), last_outcome_.approx_values.end());

    if (auto t = outer_.should_terminate(outer_opts_.v_min_x, outer_opts_.cond_max_x))
        return *t == TerminationReason::StdDevConverged ? "StdDevConverged" : "IllConditioned";
    if (outer_opts_.stagnation) {
        best_history_.push_back(best_F_);
        const std::size_t w = static_cast<std::size_t>(outer_opts_.stagnation_window) + 1;
        if (best_history_.size() >= w) {
            const auto first = best_history_.end() - static_cast<std::ptrdiff_t>(w);
            const auto [lo, hi] = std::minmax_element(first, best_history_.end());
            if (*hi - *lo < outer_opts_.stagnation_tol) return "Stagnation";
        }
    }
    return std::nullopt;
}

// ------------------------------------------------------------ run_wra

TrialRecord run_wra(const Problem& problem, SolverKind kind, const WraParams& wra, const InnerSolverParams& inner,
                    const OuterOptions& outer, const RunOptions& options, std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    TrialRecord rec;
    rec.seed = seed;
    rec.algorithm = kind == SolverKind::InnerCma ? "wra-cma" : "wra-aga";
    rec.problem = problem.spec();
    rec.budget = options.budget;

    FcallCounter counter(options.budget);
    TraceLogger logger(problem, options, rec, false);
    const auto solver = make_inner_solver(kind, inner);
    WraOptimizer opt(problem, *solver, wra, outer, seed);

    std::string reason = "BudgetExhausted";
    if (logger.log(0, 0, opt.representative(), kNaN, 0)) {
        reason = "TargetReached";
    } else {
        while (true) {
            if (counter.count() + opt.warm_start_cost() > options.budget) break;
            const auto term = opt.step(counter);
            if (logger.log(counter.count(), opt.iteration(), opt.representative(), opt.best_approx_F(), 0)) {
                reason = "TargetReached";
                break;
            }
            if (term) {
                reason = *term;
                break;
            }
        }
    }
    logger.finish(counter.count(), opt.representative(), reason);
    rec.wall_time = seconds_since(t0);
    return rec;
}

// ------------------------------------------------------------ hybrid

HybridResult local_search_hybrid(const Problem& problem, const WraOptimizer& wra, SolverKind kind,
                                 const AdvCmaConfig& adv, Rng& rng, FcallCounter& counter, TraceLogger& logger,
                                 std::int64_t& iteration, int restarts) {
    HybridResult out;
    const auto& cands = wra.last_candidates();
    const auto& pool = wra.pool();
    out.x = wra.representative();
    if (cands.empty()) return out;
    const std::size_t n_omega = pool.size();
    if (counter.count() + static_cast<std::int64_t>(cands.size() * n_omega) > counter.budget()) return out;

    std::size_t i_adv = 0;
    double best_worst = std::numeric_limits<double>::infinity();
    std::vector<double> row_adv;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        std::vector<double> row(n_omega);
        for (std::size_t k = 0; k < n_omega; ++k) row[k] = problem.evaluate(cands[i], pool.entries[k].y, counter);
        const double worst = *std::max_element(row.begin(), row.end());
        if (i == 0 || worst < best_worst) {
            best_worst = worst;
            i_adv = i;
            row_adv = row;
        }
    }
    const std::size_t k_adv =
        static_cast<std::size_t>(std::max_element(row_adv.begin(), row_adv.end()) - row_adv.begin());

    std::vector<Vector> scenarios;
    for (const auto& e : pool.entries) scenarios.push_back(e.y);
    const AdversarialCma::Function f_pool = [&problem, scenarios](std::span<const double> x, std::span<const double> y) {
        double v = problem.value(x, y);
        for (const auto& s : scenarios) v = std::max(v, problem.value(x, s));
        return v;
    };

    SymMatrix cov_y;
    if (kind == SolverKind::InnerCma) {
        cov_y = std::get<InnerCmaConfig>(pool.entries[k_adv].omega).cov;
    } else {
        const double sd = problem.by() / 2.0;
        cov_y = SymMatrix::identity(problem.dy(), 1e-2 * sd * sd);
    }
    AdversarialCma engine(f_pool, static_cast<std::int64_t>(n_omega) + 1, adv, cands[i_adv], scenarios[k_adv], 1.0,
                          wra.outer().full_covariance(), 1.0, cov_y, problem.x_box(), problem.y_box());
    while (counter.count() + engine.iteration_cost() <= counter.budget()) {
        const bool restart = engine.step(rng, counter);
        ++iteration;
        ++out.iterations;
        if (!all_finite(engine.x())) break;
        out.x = engine.x();
        out.y = engine.y();
        if (logger.log(counter.count(), iteration, engine.x(), engine.last_fxy(), restarts)) {
            out.stopped_on_target = true;
            break;
        }
        if (restart) break;
    }
    return out;
}

// ------------------------------------------------------------ restarts

TrialRecord run_wra_with_restarts(const Problem& problem, SolverKind kind, const WraParams& wra,
                                  const InnerSolverParams& inner, const OuterOptions& outer, const AdvCmaConfig& adv,
                                  bool local_search, const RunOptions& options, std::uint64_t seed,
                                  RestartArchive* archive_out) {
    const auto t0 = std::chrono::steady_clock::now();
    TrialRecord rec;
    rec.seed = seed;
    rec.algorithm = std::string(kind == SolverKind::InnerCma ? "wra-cma" : "wra-aga") + (local_search ? "+adv" : "");
    rec.problem = problem.spec();
    rec.budget = options.budget;

    FcallCounter counter(options.budget);
    TraceLogger logger(problem, options, rec, local_search);
    const auto solver = make_inner_solver(kind, inner);
    RestartArchive archive;
    std::int64_t iteration = 0;
    int restarts = 0;
    std::string reason = "BudgetExhausted";
    Vector last_z;
    bool done = false;

    for (std::uint64_t run = 0; !done; ++run) {
        WraOptimizer opt(problem, *solver, wra, outer, Rng::mix(seed, run));
        if (run == 0 && logger.log(0, 0, opt.representative(), kNaN, 0)) {
            reason = "TargetReached";
            last_z = opt.representative();
            break;
        }
        bool terminated = false;
        while (true) {
            if (counter.count() + opt.warm_start_cost() > options.budget) {
                done = true;
                break;
            }
            const auto term = opt.step(counter);
            ++iteration;
            last_z = opt.representative();
            if (logger.log(counter.count(), iteration, last_z, opt.best_approx_F(), restarts)) {
                reason = "TargetReached";
                done = true;
                break;
            }
            if (term) {
                terminated = true;
                break;
            }
        }
        for (const auto& x : opt.last_candidates()) archive.X_star.push_back(x);
        for (const auto& e : opt.pool().entries) archive.Y_star.push_back(e.y);
        if (done) break;
        if (terminated && local_search) {
            auto hy = local_search_hybrid(problem, opt, kind, adv, opt.rng(), counter, logger, iteration, restarts);
            if (!hy.y.empty()) {
                archive.X_star.push_back(hy.x);
                archive.Y_star.push_back(hy.y);
                last_z = hy.x;
            }
            if (hy.stopped_on_target) {
                reason = "TargetReached";
                break;
            }
        }
        ++restarts;
        rec.restarts = restarts;
    }

    Rng cert_rng(Rng::mix(seed, 0xce47ULL));
    if (archive.X_star.empty()) {
        logger.finish(counter.count(), last_z, reason);
    } else {
        const auto pick = pick_from_archive(problem, archive, options.certify_random_scenarios, cert_rng);
        rec.certification_fcalls = pick.certification_fcalls;
        logger.finish(counter.count(), reason == "TargetReached" ? last_z : pick.x, reason);
    }
    rec.restarts = restarts;
    if (archive_out) *archive_out = std::move(archive);
    rec.wall_time = seconds_since(t0);
    return rec;
}

// ------------------------------------------------------------ dispatch

TrialRecord run_trial(const Problem& problem, const AlgorithmConfig& config, const RunOptions& options,
                      std::uint64_t seed) {
    switch (config.algorithm) {
    case Algorithm::WraCma:
    case Algorithm::WraAga: {
        const SolverKind kind = solver_kind(config.algorithm);
        if (options.restarts)
            return run_wra_with_restarts(problem, kind, config.wra, config.inner, config.outer, config.adv, false,
                                         options, seed);
        return run_wra(problem, kind, config.wra, config.inner, config.outer, options, seed);
    }
    case Algorithm::WraCmaAdv:
    case Algorithm::WraAgaAdv:
        return run_wra_with_restarts(problem, solver_kind(config.algorithm), config.wra, config.inner, config.outer,
                                     config.adv, true, options, seed);
    case Algorithm::AdvCma: return run_adversarial_cmaes(problem, config.adv, options, seed);
    case Algorithm::ZoPgda: return run_zopgda(problem, config.zo, options, seed);
    }
    throw InvalidInput("unknown algorithm");
}

} // namespace minmax
