#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "minmax/drivers.hpp"
#include "minmax/errors.hpp"

using namespace minmax;

namespace {

ProblemSpec spec_of(ProblemId id, std::size_t d, double b = 1.0, bool bounded = true) {
    ProblemSpec s;
    s.id = id;
    s.dx = d;
    s.dy = d;
    s.b = b;
    s.bounded = bounded;
    return s;
}

void check_trace(const TrialRecord& rec) {
    REQUIRE_FALSE(rec.trace.empty());
    double best = INFINITY;
    for (std::size_t i = 0; i < rec.trace.size(); ++i) {
        if (i > 0) CHECK(rec.trace[i].fcalls > rec.trace[i - 1].fcalls);
        const double next = std::min(best, rec.trace[i].gap);
        CHECK(next <= best);
        best = next;
    }
    // thinned traces may drop the row holding the best gap
    CHECK(rec.best_gap <= best);
}

bool same_record(const TrialRecord& a, const TrialRecord& b) {
    if (a.trace.size() != b.trace.size()) return false;
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        const auto& ra = a.trace[i];
        const auto& rb = b.trace[i];
        const bool F_same = (std::isnan(ra.best_approx_F) && std::isnan(rb.best_approx_F)) ||
                            ra.best_approx_F == rb.best_approx_F;
        if (ra.fcalls != rb.fcalls || ra.iteration != rb.iteration || ra.gap != rb.gap || !F_same ||
            ra.restarts != rb.restarts)
            return false;
    }
    return a.final_x == b.final_x && a.fcalls_used == b.fcalls_used && a.stop_reason == b.stop_reason &&
           a.success == b.success && a.restarts == b.restarts;
}

} // namespace

TEST_CASE("algorithm names") {
    for (Algorithm a : {Algorithm::WraCma, Algorithm::WraAga, Algorithm::WraCmaAdv, Algorithm::WraAgaAdv,
                        Algorithm::AdvCma, Algorithm::ZoPgda})
        CHECK(parse_algorithm(to_string(a)) == a);
    CHECK(to_string(Algorithm::WraCmaAdv) == "wra-cma+adv");
    CHECK(to_string(Algorithm::ZoPgda) == "zopgda");
    CHECK_THROWS_AS(parse_algorithm("wra"), InvalidInput);
    CHECK(is_wra(Algorithm::WraAgaAdv));
    CHECK_FALSE(is_wra(Algorithm::AdvCma));
    CHECK(solver_kind(Algorithm::WraAgaAdv) == SolverKind::Aga);
}

TEST_CASE("WRA-CMA on f5, d = 1, budget 1e5: every seed reaches the target") {
    const Problem p(spec_of(ProblemId::F5, 1));
    RunOptions opt;
    opt.budget = 100000;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const TrialRecord rec = run_wra(p, SolverKind::InnerCma, WraParams{}, InnerSolverParams{}, OuterOptions{}, opt, seed);
        CHECK(rec.success);
        CHECK(rec.stop_reason == "TargetReached");
        CHECK(*rec.fcalls_to_success <= opt.budget);
        check_trace(rec);
    }
}

TEST_CASE("budget below one warm start gives no iterations") {
    const Problem p(spec_of(ProblemId::F5, 20));
    RunOptions opt;
    opt.budget = 100;
    const TrialRecord rec = run_wra(p, SolverKind::InnerCma, WraParams{}, InnerSolverParams{}, OuterOptions{}, opt, 1);
    CHECK(rec.iterations == 0);
    CHECK(rec.fcalls_used == 0);
    CHECK(rec.stop_reason == "BudgetExhausted");
    CHECK(rec.trace.size() == 1);
}

TEST_CASE("every algorithm is deterministic under a seed and respects the budget") {
    const Problem p(spec_of(ProblemId::F8, 4));
    RunOptions opt;
    opt.budget = 60000;
    opt.stop_on_target = false;
    opt.restarts = true;
    for (Algorithm a : {Algorithm::WraCma, Algorithm::WraAga, Algorithm::WraCmaAdv, Algorithm::WraAgaAdv,
                        Algorithm::AdvCma, Algorithm::ZoPgda}) {
        AlgorithmConfig cfg;
        cfg.algorithm = a;
        cfg.outer.v_min_x = 1e-3; // force internal terminations and restarts
        const TrialRecord r1 = run_trial(p, cfg, opt, 5);
        const TrialRecord r2 = run_trial(p, cfg, opt, 5);
        CAPTURE(to_string(a));
        CHECK(same_record(r1, r2));
        check_trace(r1);
        const std::int64_t allowance =
            static_cast<std::int64_t>(default_population_size(4) * default_population_size(4));
        CHECK(r1.fcalls_used <= opt.budget + allowance);
        CHECK(p.x_domain().contains(r1.final_x));
        CHECK(r1.algorithm == to_string(a));
    }
}

TEST_CASE("archive pick matches exhaustive enumeration") {
    const Problem p(spec_of(ProblemId::F4, 2));
    Rng rng(3);
    RestartArchive archive;
    for (int i = 0; i < 7; ++i) archive.X_star.push_back(p.x_domain().sample_uniform(rng));
    for (int k = 0; k < 5; ++k) archive.Y_star.push_back(p.y_domain().sample_uniform(rng));
    archive.X_star.push_back(archive.X_star[2]); // a duplicate must not win the tie

    std::size_t best_i = 0;
    double best = INFINITY;
    for (std::size_t i = 0; i < archive.X_star.size(); ++i) {
        double worst = -INFINITY;
        for (const auto& y : archive.Y_star) worst = std::max(worst, p.value(archive.X_star[i], y));
        if (worst < best) {
            best = worst;
            best_i = i;
        }
    }
    Rng unused(0);
    const ArchivePick pick = pick_from_archive(p, archive, 0, unused);
    CHECK(pick.index == best_i);
    CHECK(pick.value == best);
    CHECK(pick.certification_fcalls == 8 * 5);
}

TEST_CASE("random scenarios never lower the archive estimate") {
    const Problem p(spec_of(ProblemId::F9, 3));
    Rng rng(4);
    RestartArchive archive;
    for (int i = 0; i < 6; ++i) archive.X_star.push_back(p.x_domain().sample_uniform(rng));
    for (int k = 0; k < 3; ++k) archive.Y_star.push_back(p.y_domain().sample_uniform(rng));
    double prev = -INFINITY;
    for (int r : {0, 1, 5, 20, 100}) {
        Rng draws(9); // same prefix of random scenarios for every r
        const double v = pick_from_archive(p, archive, r, draws).value;
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("restarts: a run that never terminates archives one set") {
    const Problem p(spec_of(ProblemId::F5, 4));
    RunOptions opt;
    opt.budget = 20000;
    opt.stop_on_target = false;
    RestartArchive archive;
    OuterOptions outer;
    outer.n_omega = 10;
    const TrialRecord rec = run_wra_with_restarts(p, SolverKind::InnerCma, WraParams{}, InnerSolverParams{}, outer,
                                                  AdvCmaConfig{}, false, opt, 2, &archive);
    CHECK(rec.restarts == 0);
    CHECK(archive.X_star.size() == default_population_size(4));
    CHECK(archive.Y_star.size() == 10);
    CHECK(rec.stop_reason == "BudgetExhausted");
}

TEST_CASE("restarts: internal terminations archive every run") {
    const Problem p(spec_of(ProblemId::F5, 4));
    RunOptions opt;
    opt.budget = 200000;
    opt.stop_on_target = false;
    RestartArchive archive;
    OuterOptions outer;
    outer.n_omega = 10;
    outer.v_min_x = 1e-2;
    const TrialRecord rec = run_wra_with_restarts(p, SolverKind::Aga, WraParams{}, InnerSolverParams{}, outer,
                                                  AdvCmaConfig{}, false, opt, 3, &archive);
    CHECK(rec.restarts >= 2);
    const std::size_t runs = static_cast<std::size_t>(rec.restarts) + 1;
    CHECK(archive.X_star.size() == runs * default_population_size(4));
    CHECK(archive.Y_star.size() == runs * 10);
    check_trace(rec);
    // final_x is the archive pick
    Rng cert(0);
    const ArchivePick pick = pick_from_archive(p, archive, 0, cert);
    CHECK(rec.final_x == pick.x);
}

TEST_CASE("local search on an exhausted budget does nothing") {
    const Problem p(spec_of(ProblemId::F5, 2));
    const auto solver = make_inner_solver(SolverKind::InnerCma, InnerSolverParams{});
    OuterOptions outer;
    outer.n_omega = 4;
    WraOptimizer opt(p, *solver, WraParams{}, outer, 1);
    FcallCounter counter(1000);
    (void)opt.step(counter);
    FcallCounter empty(0);
    TrialRecord rec;
    RunOptions ro;
    TraceLogger logger(p, ro, rec, false);
    std::int64_t iteration = 0;
    const HybridResult hy = local_search_hybrid(p, opt, SolverKind::InnerCma, AdvCmaConfig{}, opt.rng(), empty,
                                                logger, iteration, 0);
    CHECK(hy.iterations == 0);
    CHECK(empty.count() == 0);
    CHECK(rec.trace.empty());
}

TEST_CASE("local search on f5 with the exact worst case as the only scenario") {
    // f_Y(x, y) = max(f(x, y), f(x, y_hat)) with y_hat = worst scenario of the
    // terminated mean; the best-so-far gap of the segment cannot increase.
    const Problem p(spec_of(ProblemId::F5, 3));
    RunOptions opt;
    opt.budget = 400000;
    opt.stop_on_target = false;
    OuterOptions outer;
    outer.n_omega = 1;
    outer.v_min_x = 1e-3;
    const TrialRecord rec = run_wra_with_restarts(p, SolverKind::InnerCma, WraParams{}, InnerSolverParams{}, outer,
                                                  AdvCmaConfig{}, true, opt, 4);
    check_trace(rec);
    CHECK(rec.restarts >= 1);
    CHECK(rec.algorithm == "wra-cma+adv");
}

TEST_CASE("f_Y bounds f on the pool scenarios") {
    const Problem p(spec_of(ProblemId::F9, 3));
    Rng rng(6);
    std::vector<Vector> pool;
    for (int k = 0; k < 4; ++k) pool.push_back(p.y_domain().sample_uniform(rng));
    const auto f_pool = [&](std::span<const double> x, std::span<const double> y) {
        double v = p.value(x, y);
        for (const auto& s : pool) v = std::max(v, p.value(x, s));
        return v;
    };
    for (int t = 0; t < 100; ++t) {
        const Vector x = p.x_domain().sample_uniform(rng);
        const Vector y = p.y_domain().sample_uniform(rng);
        CHECK(f_pool(x, y) >= p.value(x, y));
        for (const auto& s : pool) CHECK(f_pool(x, y) >= p.value(x, s));
    }
}

TEST_CASE("adversarial CMA-ES on f5, d = 1, unbounded") {
    const Problem p(spec_of(ProblemId::F5, 1, 1.0, false));
    RunOptions opt;
    opt.budget = 1000000;
    int success = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const TrialRecord rec = run_adversarial_cmaes(p, AdvCmaConfig{}, opt, seed);
        success += rec.success;
        check_trace(rec);
    }
    CHECK(success >= 18);
}

TEST_CASE("adversarial CMA-ES restarts on a constant objective") {
    const AdversarialCma::Function f = [](std::span<const double>, std::span<const double>) { return 1.0; };
    AdversarialCma engine(f, 1, AdvCmaConfig{}, Vector(2, 0.5), Vector(2, -0.5), 1.0, SymMatrix::identity(2), 1.0,
                          SymMatrix::identity(2), nullptr, nullptr);
    Rng rng(1);
    FcallCounter counter;
    int iterations = 0;
    bool restart = false;
    while (!restart && iterations < 100) {
        restart = engine.step(rng, counter);
        ++iterations;
    }
    CHECK(restart);
    CHECK(iterations <= 5);
    CHECK(counter.count() == iterations * engine.iteration_cost());
}

TEST_CASE("ZO gradient estimator") {
    const Vector a{1.0, -2.0, 0.5, 3.0};
    const Objective lin = [&](std::span<const double> v) { return dot(a, v); };
    const Vector v0{0.2, 0.1, -0.3, 0.0};
    Rng rng(12);
    Vector mean(4, 0.0);
    FcallCounter counter;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
        const Vector g = zo_gradient(lin, v0, 50, 1e-3, rng, &counter);
        for (std::size_t i = 0; i < 4; ++i) mean[i] += g[i] / reps;
    }
    CHECK(counter.count() == reps * 51);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(mean[i] - a[i]) <= 0.15 * std::abs(a[i]));

    const Objective constant = [](std::span<const double>) { return 2.0; };
    CHECK(zo_gradient(constant, v0, 5, 1e-3, rng) == Vector(4, 0.0));

    // at the origin the quadratic has zero gradient; the estimate is O(mu)
    const Objective quad = [](std::span<const double> v) { return dot(v, v); };
    const double mu = 1e-3;
    for (int r = 0; r < 20; ++r) {
        const Vector g = zo_gradient(quad, Vector(4, 0.0), 5, mu, rng);
        // each term is d/(q mu) * mu^2 * u, so the norm is at most d * mu
        CHECK(norm2(g) <= 4.0 * mu + 1e-15);
    }
}

TEST_CASE("ZO gradient is unbiased on a linear function (3 sigma band)") {
    const Vector a{0.7, -1.1, 2.0};
    const Objective lin = [&](std::span<const double> v) { return dot(a, v); };
    Rng rng(13);
    const int reps = 4000;
    Vector sum(3, 0.0), sq(3, 0.0);
    for (int r = 0; r < reps; ++r) {
        const Vector g = zo_gradient(lin, Vector(3, 0.0), 5, 1e-3, rng);
        for (std::size_t i = 0; i < 3; ++i) {
            sum[i] += g[i];
            sq[i] += g[i] * g[i];
        }
    }
    for (std::size_t i = 0; i < 3; ++i) {
        const double m = sum[i] / reps;
        const double sd = std::sqrt(sq[i] / reps - m * m);
        CHECK(std::abs(m - a[i]) <= 3.0 * sd / std::sqrt(static_cast<double>(reps)));
    }
}

TEST_CASE("ZO-PGDA converges on a small unbounded f5 and restarts when asked") {
    const Problem p(spec_of(ProblemId::F5, 2, 1.0, false));
    RunOptions opt;
    opt.budget = 1000000;
    const TrialRecord rec = run_zopgda(p, ZoPgdaConfig{}, opt, 3);
    CHECK(rec.success);
    check_trace(rec);

    ZoPgdaConfig restart;
    restart.restart = true;
    opt.stop_on_target = false;
    opt.budget = 200000;
    const TrialRecord rr = run_zopgda(p, restart, opt, 3);
    CHECK(rr.restarts >= 1);
    check_trace(rr);
}

TEST_CASE("ZO-PGDA projects both iterates onto their boxes") {
    // large steps on f5 with b = 100 leave the box at once without projection
    const Problem p(spec_of(ProblemId::F5, 4, 100.0));
    ZoPgdaConfig big;
    big.eta_x = 1.0;
    big.eta_y = 1.0;
    RunOptions opt;
    opt.budget = 2000;
    opt.stop_on_target = false;
    const TrialRecord rec = run_zopgda(p, big, opt, 5);
    CHECK(p.x_domain().contains(rec.final_x));
    CHECK(rec.stop_reason != "Diverged");
    for (const auto& row : rec.trace) CHECK(std::isfinite(row.gap));
}

TEST_CASE("ZO-PGDA on a linear slice follows exact-gradient PGDA within the noise envelope") {
    // f(x, y) = x.y on a bounded box: exact PGDA moves x by -eta_x y, y by eta_y x.
    const Problem p(spec_of(ProblemId::F1, 2));
    const Vector x{0.5, -0.25};
    const Vector y{1.0, 2.0};
    const Objective fx = [&](std::span<const double> v) { return p.value(v, y); };
    Rng rng(21);
    const int reps = 2000;
    Vector mean(2, 0.0);
    for (int r = 0; r < reps; ++r) {
        const Vector g = zo_gradient(fx, x, 5, 1e-6, rng);
        for (std::size_t i = 0; i < 2; ++i) mean[i] += g[i] / reps;
    }
    // estimator variance per coordinate is at most d |a|^2 / q
    const double envelope = 4.0 * std::sqrt(2.0 * dot(y, y) / 5.0 / reps);
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(mean[i] - y[i]) <= envelope);
}

TEST_CASE("option validation") {
    OuterOptions o;
    o.n_omega = 0;
    CHECK_THROWS_AS(o.validate(), InvalidInput);
    AdvCmaConfig a;
    a.g_tol = 0.0;
    CHECK_THROWS_AS(a.validate(), InvalidInput);
    ZoPgdaConfig z;
    z.q = 0;
    CHECK_THROWS_AS(z.validate(), InvalidInput);
}
