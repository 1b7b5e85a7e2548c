// One pass/fail line per acceptance criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "minmax/cmaes.hpp"
#include "minmax/drivers.hpp"
#include "minmax/evaluation.hpp"
#include "minmax/harness.hpp"
#include "minmax/kendall.hpp"
#include "minmax/wra.hpp"

using namespace minmax;

namespace {

struct Settings {
    int trials = 20;
    std::int64_t budget = 10'000'000;
    std::uint64_t seed = 1;
    int jobs = 1;
};

Settings g;

ProblemSpec spec_of(ProblemId id, std::size_t d, double b = 1.0, bool bounded = true) {
    ProblemSpec s;
    s.id = id;
    s.dx = d;
    s.dy = d;
    s.b = b;
    s.bounded = bounded;
    return s;
}

AlgorithmConfig algo_of(Algorithm a) {
    AlgorithmConfig c;
    c.algorithm = a;
    return c;
}

struct Batch {
    std::vector<TrialRecord> records;
    BatchSummary summary;
    double seconds = 0.0;
};

Batch run(const std::string& label, const ProblemSpec& spec, const AlgorithmConfig& algo) {
    RunOptions opts;
    opts.budget = g.budget;
    const auto t0 = std::chrono::steady_clock::now();
    Batch b;
    b.records = run_batch(spec, algo, opts, g.trials, g.seed, g.jobs);
    b.summary = aggregate(b.records);
    b.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream med;
    if (b.summary.median_fcalls) med << *b.summary.median_fcalls;
    else med << "-";
    std::printf("  %-40s %2d/%d success, median f-calls %s (%.0f s)\n", label.c_str(), b.summary.n_success,
                b.summary.n_trials, med.str().c_str(), b.seconds);
    std::fflush(stdout);
    return b;
}

int at_least(int k) { return (k * g.trials + 19) / 20; } // scaled for --trials
int at_most(int k) { return k * g.trials / 20; }

class Verdict {
public:
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass_ = false;
            failed_.push_back(what);
        }
    }
    bool pass() const { return pass_; }
    std::string detail() const {
        std::string s;
        for (const auto& f : failed_) s += (s.empty() ? "" : "; ") + f;
        return s;
    }

private:
    bool pass_ = true;
    std::vector<std::string> failed_;
};

std::string count_text(const Batch& b) {
    return std::to_string(b.summary.n_success) + "/" + std::to_string(b.summary.n_trials);
}

// ------------------------------------------------------------ criteria

Verdict criterion_1() {
    Verdict v;
    for (ProblemId id : {ProblemId::F5, ProblemId::F7})
        for (double b : {1.0, 100.0})
            for (Algorithm a : {Algorithm::WraCma, Algorithm::WraAga}) {
                const std::string label = to_string(id) + " b=" + format_double(b) + " " + to_string(a);
                const Batch r = run(label, spec_of(id, 20, b), algo_of(a));
                v.require(r.summary.n_success >= at_least(18), label + " " + count_text(r));
            }
    return v;
}

Verdict criterion_2() {
    Verdict v;
    const Batch lo = run("f5 b=1 wra-cma", spec_of(ProblemId::F5, 20, 1.0), algo_of(Algorithm::WraCma));
    const Batch hi = run("f5 b=100 wra-cma", spec_of(ProblemId::F5, 20, 100.0), algo_of(Algorithm::WraCma));
    if (!lo.summary.median_fcalls || !hi.summary.median_fcalls) {
        v.require(false, "no successful trials to take a median from");
        return v;
    }
    const double ratio = *hi.summary.median_fcalls / *lo.summary.median_fcalls;
    std::printf("  median ratio b=100 / b=1: %.3f\n", ratio);
    v.require(ratio <= 3.0, "ratio " + format_double(ratio));
    return v;
}

Verdict criterion_3() {
    Verdict v;
    const auto zo = algo_of(Algorithm::ZoPgda);
    const auto adv = algo_of(Algorithm::AdvCma);
    const Batch zo100 = run("f5 unbounded b=100 zopgda", spec_of(ProblemId::F5, 20, 100.0, false), zo);
    const Batch adv100 = run("f5 unbounded b=100 adv-cma", spec_of(ProblemId::F5, 20, 100.0, false), adv);
    const Batch zo1 = run("f5 unbounded b=1 zopgda", spec_of(ProblemId::F5, 20, 1.0, false), zo);
    const Batch adv1 = run("f5 unbounded b=1 adv-cma", spec_of(ProblemId::F5, 20, 1.0, false), adv);
    v.require(zo100.summary.n_success == 0, "zopgda b=100 " + count_text(zo100));
    v.require(adv100.summary.n_success == 0, "adv-cma b=100 " + count_text(adv100));
    v.require(zo1.summary.n_success >= at_least(10), "zopgda b=1 " + count_text(zo1));
    v.require(adv1.summary.n_success >= at_least(18), "adv-cma b=1 " + count_text(adv1));
    return v;
}

Verdict criterion_4() {
    Verdict v;
    const ProblemSpec f8 = spec_of(ProblemId::F8, 20);
    for (Algorithm a : {Algorithm::WraCma, Algorithm::WraAga}) {
        const Batch r = run("f8 " + to_string(a), f8, algo_of(a));
        v.require(r.summary.n_success >= at_least(18), to_string(a) + " " + count_text(r));
        AlgorithmConfig one = algo_of(a);
        one.outer.n_omega = 1;
        const Batch r1 = run("f8 " + to_string(a) + " n_omega=1", f8, one);
        v.require(r1.summary.n_success >= at_least(18), to_string(a) + " n_omega=1 " + count_text(r1));
    }
    for (Algorithm a : {Algorithm::AdvCma, Algorithm::ZoPgda}) {
        const Batch r = run("f8 " + to_string(a), f8, algo_of(a));
        v.require(r.summary.n_success == 0, to_string(a) + " " + count_text(r));
    }
    return v;
}

Verdict criterion_5() {
    Verdict v;
    const ProblemSpec f1 = spec_of(ProblemId::F1, 20);
    const Batch full = run("f1 wra-cma n_omega=36", f1, algo_of(Algorithm::WraCma));
    AlgorithmConfig cma1 = algo_of(Algorithm::WraCma);
    cma1.outer.n_omega = 1;
    const Batch small = run("f1 wra-cma n_omega=1", f1, cma1);
    AlgorithmConfig aga1 = algo_of(Algorithm::WraAga);
    aga1.outer.n_omega = 1;
    const Batch aga = run("f1 wra-aga n_omega=1", f1, aga1);
    v.require(full.summary.n_success >= at_least(18), "wra-cma n_omega=36 " + count_text(full));
    v.require(small.summary.n_success <= at_most(2), "wra-cma n_omega=1 " + count_text(small));
    v.require(aga.summary.n_success >= at_least(18), "wra-aga n_omega=1 " + count_text(aga));
    return v;
}

Verdict criterion_6() {
    Verdict v;
    const ProblemSpec f10 = spec_of(ProblemId::F10, 20);
    for (int c : {1, 5, 7}) {
        AlgorithmConfig a = algo_of(Algorithm::WraCma);
        a.inner.c_max = c;
        const Batch r = run("f10 wra-cma c_max=" + std::to_string(c), f10, a);
        if (c == 1) v.require(r.summary.n_success <= at_most(5), "wra-cma c_max=1 " + count_text(r));
        else v.require(r.summary.n_success >= at_least(15), "wra-cma c_max=" + std::to_string(c) + " " + count_text(r));
    }
    AlgorithmConfig aga = algo_of(Algorithm::WraAga);
    aga.inner.c_max = 1;
    const Batch r = run("f10 wra-aga c_max=1", f10, aga);
    v.require(r.summary.n_success >= at_least(18), "wra-aga c_max=1 " + count_text(r));
    return v;
}

Verdict criterion_7() {
    Verdict v;
    const ProblemSpec f11 = spec_of(ProblemId::F11, 20, 1.0);
    const Batch cma = run("f11 wra-cma", f11, algo_of(Algorithm::WraCma));
    const Batch aga = run("f11 wra-aga", f11, algo_of(Algorithm::WraAga));
    v.require(cma.summary.n_success >= at_least(18), "wra-cma " + count_text(cma));
    v.require(aga.summary.n_success == 0, "wra-aga " + count_text(aga));
    int non_monotone = 0;
    double worst_rise = 0.0;
    for (const auto& rec : aga.records) {
        bool ok = true;
        for (std::size_t i = 1; i < rec.trace.size(); ++i) {
            const double prev = rec.trace[i - 1].gap;
            const double rise = rec.trace[i].gap - prev;
            if (rise > 1e-12 * std::max(1.0, std::abs(prev))) {
                ok = false;
                worst_rise = std::max(worst_rise, rise / std::max(prev, 1e-300));
            }
        }
        non_monotone += !ok;
    }
    std::printf("  wra-aga traces with a rising gap: %d/%d (largest relative rise %.3g)\n", non_monotone,
                static_cast<int>(aga.records.size()), worst_rise);
    v.require(non_monotone == 0, "wra-aga gap trace rises in " + std::to_string(non_monotone) + " trials");
    return v;
}

Verdict criterion_8() {
    Verdict v;
    const ProblemSpec f9 = spec_of(ProblemId::F9, 20);
    const Batch cma = run("f9 wra-cma n_omega=36", f9, algo_of(Algorithm::WraCma));
    const Batch aga = run("f9 wra-aga", f9, algo_of(Algorithm::WraAga));
    v.require(cma.summary.n_success >= at_least(15), "wra-cma " + count_text(cma));
    v.require(aga.summary.n_success <= at_most(5), "wra-aga " + count_text(aga));
    return v;
}

// ------------------------------------------------------------ properties

double tau_b_pairs(const Vector& a, const Vector& b) {
    double concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const double da = a[i] - a[j];
            const double db = b[i] - b[j];
            if (da == 0.0 && db == 0.0) continue;
            if (da == 0.0) ++ties_a;
            else if (db == 0.0) ++ties_b;
            else if ((da > 0) == (db > 0)) ++concordant;
            else ++discordant;
        }
    const double denom = std::sqrt((concordant + discordant + ties_a) * (concordant + discordant + ties_b));
    return denom == 0.0 ? 0.0 : (concordant - discordant) / denom;
}

bool kendall_property() {
    Rng rng(77);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 60);
        const int levels = 1 + static_cast<int>(rng.uniform() * 8);
        Vector a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = std::floor(rng.uniform() * levels);
            b[i] = rng.uniform() < 0.5 ? a[i] + std::floor(rng.uniform() * 3) : std::floor(rng.uniform() * levels);
        }
        if (std::abs(kendall_tau(a, b) - tau_b_pairs(a, b)) > 1e-12) return false;
    }
    return true;
}

// Grid maximum with a tolerance of one neighbour slope times the cell width per axis.
bool worst_scenario_property() {
    Rng rng(23);
    const int grid = 201;
    for (int id = 1; id <= 11; ++id)
        for (std::size_t d : {1u, 2u}) {
            const Problem p(spec_of(static_cast<ProblemId>(id), d));
            const double h = 2.0 * p.by() / (grid - 1);
            for (int t = 0; t < 20; ++t) {
                const Vector x = p.x_domain().sample_uniform(rng);
                double best = -INFINITY, slope = 0.0;
                const std::size_t total = d == 1 ? grid : grid * grid;
                Vector y(d);
                for (std::size_t flat = 0; flat < total; ++flat) {
                    std::size_t r = flat;
                    std::vector<int> k(d);
                    for (std::size_t i = 0; i < d; ++i) {
                        k[i] = static_cast<int>(r % grid);
                        r /= grid;
                        y[i] = k[i] == grid - 1 ? p.by() : -p.by() + h * k[i];
                    }
                    const double f = p.value(x, y);
                    best = std::max(best, f);
                    for (std::size_t i = 0; i < d; ++i) {
                        if (k[i] + 1 >= grid) continue;
                        Vector n = y;
                        n[i] = k[i] + 1 == grid - 1 ? p.by() : -p.by() + h * (k[i] + 1);
                        slope = std::max(slope, std::abs(p.value(x, n) - f) / h);
                    }
                }
                const double wc = p.worst_case_value(x);
                const double tol = slope * h * static_cast<double>(d) + 1e-12;
                if (wc < best - 1e-12 || wc - best > tol) return false;
                if (std::abs(p.value(x, p.worst_scenario(x)) - wc) > 1e-12 * std::max(1.0, std::abs(wc)))
                    return false;
            }
        }
    return true;
}

bool exp_invariance_property() {
    const Vector m0{1.0, -2.0, 0.5, 3.0, -1.0};
    PopulationCma a(m0, SymMatrix::identity(5)), b(m0, SymMatrix::identity(5));
    Rng ra(99), rb(99);
    for (int it = 0; it < 100; ++it) {
        const auto& ca = a.ask(ra);
        const auto& cb = b.ask(rb);
        Vector va(ca.size()), vb(cb.size());
        for (std::size_t k = 0; k < ca.size(); ++k) {
            va[k] = dot(ca[k], ca[k]);
            vb[k] = std::exp(dot(cb[k], cb[k]));
        }
        a.tell(rank_ascending(va));
        b.tell(rank_ascending(vb));
        if (a.mean() != b.mean() || a.step_size() != b.step_size()) return false;
    }
    return std::equal(a.cov().data().begin(), a.cov().data().end(), b.cov().data().begin());
}

// Delegates to a real solver; records spent f-calls, F monotonicity and sticky h.
class RecordingSolver : public InnerSolver {
public:
    explicit RecordingSolver(const InnerSolver& inner) : inner_(inner) {}
    SolverKind kind() const override { return inner_.kind(); }
    std::pair<Vector, SolverConfig> draw_initial(const Problem& p, Rng& rng) const override {
        return inner_.draw_initial(p, rng);
    }
    void round(std::span<const double> x, InnerState& st, const Problem& p, Rng& rng,
               FcallCounter& counter) const override {
        const auto before = counter.count();
        const double F = st.F;
        const bool was_h = st.theta.h;
        inner_.round(x, st, p, rng, counter);
        spent += counter.count() - before;
        if (st.F < F || st.F != p.value(x, st.y) || !p.y_domain().contains(st.y)) ok = false;
        if (was_h && (!st.theta.h || counter.count() != before)) ok = false;
    }
    mutable std::int64_t spent = 0;
    mutable bool ok = true;

private:
    const InnerSolver& inner_;
};

bool ledger_and_inner_property() {
    for (int id : {1, 5, 8, 9, 10, 11}) {
        const Problem p(spec_of(static_cast<ProblemId>(id), 4));
        for (SolverKind kind : {SolverKind::InnerCma, SolverKind::Aga}) {
            const auto base = make_inner_solver(kind, InnerSolverParams{});
            RecordingSolver rec(*base);
            Rng rng(5 + id);
            ScenarioPool pool = pool_init(9, p, rec, rng);
            for (int call = 0; call < 10; ++call) {
                std::vector<Vector> cands;
                for (int i = 0; i < 8; ++i) cands.push_back(p.x_domain().sample_uniform(rng));
                FcallCounter counter;
                rec.spent = 0;
                const WraOutcome out = wra_approximate(pool, cands, WraParams{}, rec, p, rng, counter);
                if (out.fcalls_used != 8 * 9 + rec.spent || counter.count() != out.fcalls_used) return false;
                if (out.rankings != rank_ascending(out.approx_values)) return false;
            }
            if (!rec.ok) return false;
        }
    }
    return true;
}

bool rerun_property() {
    RunOptions opts;
    opts.budget = 40000;
    for (int a = 0; a < 6; ++a) {
        const AlgorithmConfig algo = algo_of(static_cast<Algorithm>(a));
        const Problem p(spec_of(ProblemId::F9, 3));
        const TrialRecord r1 = run_trial(p, algo, opts, 42);
        const TrialRecord r2 = run_trial(p, algo, opts, 42);
        if (trace_csv(r1) != trace_csv(r2) || r1.final_x != r2.final_x) return false;
    }
    return true;
}

bool mirror_property() {
    Rng rng(21);
    for (int t = 0; t < 100000; ++t) {
        const double lo = rng.uniform(-5.0, 0.0);
        const double hi = lo + rng.uniform(0.1, 4.0);
        const double x = rng.uniform(-50.0, 50.0);
        const double m = mirror_coordinate(x, lo, hi);
        if (m < lo || m > hi || mirror_coordinate(m, lo, hi) != m) return false;
    }
    const BoxDomain box(Vector(6, -3.0), Vector(6, 3.0));
    PopulationCma es(Vector(6, 2.5), SymMatrix::identity(6, 9.0), box);
    Rng r(3);
    for (int it = 0; it < 200; ++it) {
        const auto& cands = es.ask(r);
        Vector v(cands.size());
        for (std::size_t k = 0; k < cands.size(); ++k) {
            if (!box.contains(cands[k])) return false;
            v[k] = -cands[k][0];
        }
        es.tell(rank_ascending(v));
        if (!box.contains(es.mean())) return false;
    }
    return true;
}

Verdict criterion_9() {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    const std::pair<const char*, std::function<bool()>> suites[] = {
        {"kendall tau-b vs pair count", kendall_property},
        {"worst_scenario vs grid brute force", worst_scenario_property},
        {"exp-transform invariance", exp_invariance_property},
        {"f-call ledger, monotone F_y, sticky h", ledger_and_inner_property},
        {"bit-identical reruns", rerun_property},
        {"mirroring idempotence and in-box", mirror_property},
    };
    for (const auto& [name, fn] : suites) {
        const bool ok = fn();
        std::printf("  %-40s %s\n", name, ok ? "ok" : "FAILED");
        v.require(ok, name);
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("  property suites took %.1f s\n", s);
    v.require(s < 60.0, "took " + format_double(s) + " s");
    return v;
}

Verdict criterion_10() {
    Verdict v;
    Vector evals;
    for (int seed = 1; seed <= 20; ++seed) {
        PopulationCma es(Vector(20, 1.0), SymMatrix::identity(20));
        Rng rng(static_cast<std::uint64_t>(seed));
        std::int64_t n = 0;
        double best = INFINITY;
        while (best > 1e-10 && n < 1'000'000) {
            const auto& cands = es.ask(rng);
            Vector f(cands.size());
            for (std::size_t k = 0; k < cands.size(); ++k) {
                f[k] = dot(cands[k], cands[k]);
                ++n;
                best = std::min(best, f[k]);
                if (best <= 1e-10) break;
            }
            if (best <= 1e-10) break;
            es.tell(rank_ascending(f));
        }
        evals.push_back(best <= 1e-10 ? static_cast<double>(n) : INFINITY);
    }
    const double median = quantile(evals, 0.5);
    std::printf("  sphere d=20: median evaluations %.0f (min %.0f, max %.0f)\n", median,
                *std::min_element(evals.begin(), evals.end()), *std::max_element(evals.begin(), evals.end()));
    v.require(median <= 2.5e4, "median " + format_double(median));
    return v;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    int only = 0;
    app.add_option("--only", only, "run a single criterion (1-10)")->check(CLI::Range(0, 10));
    app.add_option("--jobs", g.jobs, "parallel trial workers, 0 for all cores")->check(CLI::NonNegativeNumber);
    app.add_option("--trials", g.trials, "trials per batch; thresholds scale from 20")->check(CLI::PositiveNumber);
    app.add_option("--budget", g.budget, "f-call budget per trial")->check(CLI::PositiveNumber);
    app.add_option("--seed", g.seed, "master seed");
    CLI11_PARSE(app, argc, argv);
    if (g.jobs == 0) g.jobs = std::max(1u, std::thread::hardware_concurrency());

    const std::map<int, std::function<Verdict()>> criteria = {
        {1, criterion_1}, {2, criterion_2}, {3, criterion_3}, {4, criterion_4}, {5, criterion_5},
        {6, criterion_6}, {7, criterion_7}, {8, criterion_8}, {9, criterion_9}, {10, criterion_10},
    };
    int failures = 0;
    for (const auto& [n, fn] : criteria) {
        if (only != 0 && n != only) continue;
        const Verdict v = fn();
        std::printf("criterion %d: %s%s%s\n", n, v.pass() ? "PASS" : "FAIL", v.pass() ? "" : " - ",
                    v.detail().c_str());
        std::fflush(stdout);
        failures += !v.pass();
    }
    return failures == 0 ? 0 : 1;
}
