#include "minmax/wra.hpp"

#include <algorithm>
#include <cmath>

#include "minmax/cmaes.hpp"
#include "minmax/errors.hpp"
#include "minmax/kendall.hpp"

namespace minmax {

void WraParams::validate() const {
    if (!(tau_threshold >= -1.0 && tau_threshold <= 1.0)) throw InvalidInput("tau_threshold must lie in [-1, 1]");
    if (!(p_threshold > 0.0 && p_threshold < p_plus && p_plus <= 1.0))
        throw InvalidInput("need 0 < p_threshold < p_plus <= 1");
    if (!(p_minus > 0.0)) throw InvalidInput("p_minus must be positive");
    if (max_rounds < 1) throw InvalidInput("max_rounds must be at least 1");
}

ScenarioPool pool_init(std::size_t n_omega, const Problem& problem, const InnerSolver& solver, Rng& rng) {
    if (n_omega < 1) throw InvalidInput("pool size must be at least 1");
    ScenarioPool pool;
    pool.entries.reserve(n_omega);
    for (std::size_t k = 0; k < n_omega; ++k) {
        auto [y, omega] = solver.draw_initial(problem, rng);
        pool.entries.push_back(PoolEntry{std::move(y), std::move(omega), 1.0});
    }
    return pool;
}

WraOutcome wra_approximate(ScenarioPool& pool, const std::vector<Vector>& candidates, const WraParams& params,
                           const InnerSolver& solver, const Problem& problem, Rng& rng, FcallCounter& counter) {
    if (candidates.empty()) throw InvalidInput("wra_approximate: empty candidate list");
    if (pool.entries.empty()) throw InvalidInput("wra_approximate: empty scenario pool");
    const std::size_t lam = candidates.size();
    const std::size_t n_omega = pool.size();
    const std::int64_t start = counter.count();
    const std::uint64_t key = rng.next_u64();

    WraOutcome out;
    out.selected.assign(lam, 0);
    out.states.resize(lam);

    // warm start
    Vector prev(lam);
    for (std::size_t i = 0; i < lam; ++i) {
        double best = 0.0;
        std::size_t arg = 0;
        for (std::size_t k = 0; k < n_omega; ++k) {
            const double v = problem.evaluate(candidates[i], pool.entries[k].y, counter);
            if (k == 0 || v > best || (std::isnan(best) && !std::isnan(v))) {
                best = v;
                arg = k;
            }
        }
        out.selected[i] = arg;
        InnerState& st = out.states[i];
        st.y = pool.entries[arg].y;
        st.F = best;
        st.omega = pool.entries[arg].omega;
        st.theta = solver.fresh_theta();
        prev[i] = best;
    }

    // rounds
    std::vector<Rng> streams;
    streams.reserve(lam);
    for (std::size_t i = 0; i < lam; ++i) streams.push_back(Rng::stream(key, i));
    Vector cur(lam);
    for (int rd = 1; rd <= params.max_rounds; ++rd) {
        if (counter.exhausted()) break;
        for (std::size_t i = 0; i < lam; ++i) {
            solver.round(candidates[i], out.states[i], problem, streams[i], counter);
            cur[i] = out.states[i].F;
        }
        out.rounds_used = rd;
        if (lam < 2) break;
        const double tau = kendall_tau(prev, cur);
        prev = cur;
        if (tau > params.tau_threshold) break;
        if (std::all_of(out.states.begin(), out.states.end(), [](const InnerState& s) { return s.theta.h; })) break;
    }

    out.approx_values.resize(lam);
    for (std::size_t i = 0; i < lam; ++i) out.approx_values[i] = out.states[i].F;
    out.rankings = rank_ascending(out.approx_values);

    // post-processing
    std::vector<char> chosen(n_omega, 0);
    for (std::size_t i = 0; i < lam; ++i) chosen[out.selected[i]] = 1;
    for (std::size_t k = 0; k < n_omega; ++k) {
        if (!chosen[k]) continue;
        std::size_t rep = lam;
        for (std::size_t i = 0; i < lam; ++i) {
            if (out.selected[i] != k) continue;
            if (rep == lam || out.approx_values[i] < out.approx_values[rep]) rep = i;
        }
        PoolEntry& e = pool.entries[k];
        e.y = out.states[rep].y;
        e.omega = out.states[rep].omega;
        e.p = std::min(e.p + params.p_plus, 1.0);
    }
    for (std::size_t k = 0; k < n_omega; ++k) {
        PoolEntry& e = pool.entries[k];
        if (!chosen[k]) e.p -= params.p_minus;
        if (e.p < params.p_threshold) {
            auto [y, omega] = solver.draw_initial(problem, rng);
            e.y = std::move(y);
            e.omega = std::move(omega);
            e.p = 1.0;
            out.refreshed.push_back(k);
        }
    }
    out.fcalls_used = counter.count() - start;
    return out;
}

} // namespace minmax
