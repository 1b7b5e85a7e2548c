#include "minmax/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "minmax/errors.hpp"

namespace minmax {

bool judge_success(const Problem& problem, std::span<const double> z, double tol) {
    return problem.gap(z) <= tol;
}

double certify_worst_case(const Objective& f_of_y, const BoxDomain& y_domain, const CertifyProtocol& protocol,
                          Rng& rng, FcallCounter* counter) {
    if (protocol.n_starts < 1) throw InvalidInput("certify_worst_case: n_starts must be at least 1");
    if (protocol.budget_per_start < 0) throw InvalidInput("certify_worst_case: negative budget");
    return multistart_maximize(f_of_y, y_domain, protocol.n_starts, protocol.budget_per_start, rng, counter).value;
}

double certify_worst_case(const Problem& problem, std::span<const double> x, const CertifyProtocol& protocol, Rng& rng,
                          FcallCounter* counter) {
    if (protocol.kind == CertifyKind::ClosedForm) return problem.worst_case_value(x);
    const Vector xv(x.begin(), x.end());
    const Objective f = [&problem, &xv](std::span<const double> y) { return problem.value(xv, y); };
    return certify_worst_case(f, problem.y_domain(), protocol, rng, counter);
}

double quantile(std::span<const double> values, double p) {
    std::vector<double> v;
    v.reserve(values.size());
    for (double x : values)
        if (!std::isnan(x)) v.push_back(x);
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

namespace {

std::vector<std::int64_t> shared_grid(std::span<const TrialRecord> records, std::size_t max_points) {
    std::vector<std::int64_t> grid;
    for (const auto& r : records)
        for (const auto& row : r.trace) grid.push_back(row.fcalls);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.size() <= max_points || max_points < 2) return grid;

    // keep the endpoints and one point per log-spaced bucket
    const double lo = std::log1p(static_cast<double>(grid.front()));
    const double hi = std::log1p(static_cast<double>(grid.back()));
    std::vector<std::int64_t> thinned{grid.front()};
    std::size_t bucket = 0;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        const double t = (std::log1p(static_cast<double>(grid[i])) - lo) / (hi - lo);
        const auto b = static_cast<std::size_t>(t * static_cast<double>(max_points - 1));
        if (b > bucket) {
            thinned.push_back(grid[i]);
            bucket = b;
        }
    }
    thinned.push_back(grid.back());
    return thinned;
}

} // namespace

BatchSummary aggregate(std::span<const TrialRecord> records, std::size_t max_grid_points) {
    BatchSummary s;
    s.n_trials = static_cast<int>(records.size());
    if (records.empty()) return s;
    s.algorithm = records.front().algorithm;
    s.problem = records.front().problem;

    std::vector<double> fc;
    for (const auto& r : records) {
        if (!r.success) continue;
        ++s.n_success;
        if (r.fcalls_to_success) fc.push_back(static_cast<double>(*r.fcalls_to_success));
    }
    if (!fc.empty()) {
        s.median_fcalls = quantile(fc, 0.5);
        s.q25_fcalls = quantile(fc, 0.25);
        s.q75_fcalls = quantile(fc, 0.75);
    }

    s.curve.fcalls = shared_grid(records, max_grid_points);
    std::vector<std::size_t> cursor(records.size(), 0);
    std::vector<double> column(records.size());
    for (const std::int64_t g : s.curve.fcalls) {
        for (std::size_t r = 0; r < records.size(); ++r) {
            const auto& tr = records[r].trace;
            while (cursor[r] < tr.size() && tr[cursor[r]].fcalls <= g) ++cursor[r];
            column[r] = cursor[r] == 0 ? std::numeric_limits<double>::quiet_NaN() : tr[cursor[r] - 1].gap;
        }
        s.curve.q25.push_back(quantile(column, 0.25));
        s.curve.q50.push_back(quantile(column, 0.5));
        s.curve.q75.push_back(quantile(column, 0.75));
    }
    return s;
}

} // namespace minmax
