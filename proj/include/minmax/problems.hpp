#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "minmax/numerics.hpp"

namespace minmax {

struct BoxDomain {
    Vector lower;
    Vector upper;

    BoxDomain() = default;
    BoxDomain(Vector lo, Vector hi); // throws InvalidInput unless lo[i] < hi[i]
    static BoxDomain uniform(std::size_t dim, double lo, double hi);

    std::size_t dim() const noexcept { return lower.size(); }
    double width(std::size_t i) const { return upper[i] - lower[i]; }
    bool contains(std::span<const double> v) const;
    [[nodiscard]] Vector clip(std::span<const double> v) const;
    Vector sample_uniform(Rng& rng) const;
};

/// Counts f-calls against an optional budget. Increments are atomic so one
/// counter may be shared by logically parallel inner solves.
class FcallCounter {
public:
    explicit FcallCounter(std::int64_t budget = std::numeric_limits<std::int64_t>::max()) : budget_(budget) {}
    FcallCounter(const FcallCounter&) = delete;
    FcallCounter& operator=(const FcallCounter&) = delete;

    void add(std::int64_t n = 1) noexcept { count_.fetch_add(n, std::memory_order_relaxed); }
    std::int64_t count() const noexcept { return count_.load(std::memory_order_relaxed); }
    std::int64_t budget() const noexcept { return budget_; }
    std::int64_t remaining() const noexcept { return budget_ - count(); }
    bool exhausted() const noexcept { return count() >= budget_; }

private:
    std::atomic<std::int64_t> count_{0};
    std::int64_t budget_;
};

enum class ProblemId { F1 = 1, F2, F3, F4, F5, F6, F7, F8, F9, F10, F11 };

/// S: strict saddle, non-smooth; W: weak saddle; N: not a saddle;
/// C: smooth strict saddle (f5, f7, f11).
enum class SaddleCategory { S, W, N, C };

enum class MatrixKind { Diagonal, Band };

std::string to_string(ProblemId id);
ProblemId parse_problem_id(std::string_view s); // "f1".."f11"
char to_char(SaddleCategory c);
std::string to_string(MatrixKind k);
MatrixKind parse_matrix_kind(std::string_view s); // "diag" | "band"

/// d_x x d_y interaction matrix. Diagonal is b*I (d_x == d_y). Band has
/// width w = |d_y - d_x| + 1 with all band entries equal to `value`:
/// for d_x <= d_y row i covers columns i..i+w-1, otherwise column j covers rows j..j+w-1.
class InteractionMatrix {
public:
    InteractionMatrix() = default;
    static InteractionMatrix diagonal(std::size_t dim, double b);
    static InteractionMatrix band(std::size_t dx, std::size_t dy, double value);

    MatrixKind kind() const noexcept { return kind_; }
    std::size_t dx() const noexcept { return dx_; }
    std::size_t dy() const noexcept { return dy_; }
    std::size_t bandwidth() const noexcept { return width_; }
    double value() const noexcept { return value_; }

    /// z = B^T x written into out (size d_y); allocation-free.
    void transpose_times(std::span<const double> x, std::span<double> out) const;
    /// B y into out (size d_x).
    void times(std::span<const double> y, std::span<double> out) const;
    Matrix dense() const;

private:
    MatrixKind kind_ = MatrixKind::Diagonal;
    std::size_t dx_ = 0;
    std::size_t dy_ = 0;
    std::size_t width_ = 1;
    double value_ = 1.0;
};

struct ProblemSpec {
    ProblemId id = ProblemId::F5;
    std::size_t dx = 20;
    std::size_t dy = 20;
    MatrixKind matrix = MatrixKind::Diagonal;
    double b = 1.0;
    double by = 3.0;
    double x_lower = -3.0;
    double x_upper = 3.0;
    bool bounded = true;
    double gamma = 1.0;
};

struct Optimum {
    Vector x_star;
    double F_star = 0.0;
};

class Problem {
public:
    /// Validates the spec. Malformed values throw InvalidInput; combinations
    /// that are well-formed but not supported throw Unsupported.
    explicit Problem(const ProblemSpec& spec);

    const ProblemSpec& spec() const noexcept { return spec_; }
    ProblemId id() const noexcept { return spec_.id; }
    std::size_t dx() const noexcept { return spec_.dx; }
    std::size_t dy() const noexcept { return spec_.dy; }
    double by() const noexcept { return spec_.by; }
    bool bounded() const noexcept { return spec_.bounded; }
    SaddleCategory category() const noexcept;
    const InteractionMatrix& matrix() const noexcept { return B_; }

    /// Domains used for search. In unbounded mode these still describe the
    /// initialization region but solvers skip mirroring and clipping.
    const BoxDomain& x_domain() const noexcept { return x_domain_; }
    const BoxDomain& y_domain() const noexcept { return y_domain_; }
    const BoxDomain* x_box() const noexcept { return spec_.bounded ? &x_domain_ : nullptr; }
    const BoxDomain* y_box() const noexcept { return spec_.bounded ? &y_domain_ : nullptr; }

    double alpha() const noexcept { return alpha_; }
    std::size_t dy_star() const noexcept { return dy_star_; }

    /// f(x, y); counts one f-call.
    double evaluate(std::span<const double> x, std::span<const double> y, FcallCounter& counter) const;
    /// f(x, y) without counting; for oracles and certification.
    double value(std::span<const double> x, std::span<const double> y) const;

    Vector worst_scenario(std::span<const double> x) const;
    double worst_case_value(std::span<const double> x) const;
    const Optimum& optimum() const noexcept { return optimum_; }
    double gap(std::span<const double> x) const { return std::abs(worst_case_value(x) - optimum_.F_star); }

    /// Max of f over a regular grid on the y box with both endpoints per axis.
    /// Throws Unsupported when d_y > 3.
    double brute_force_worst_case(std::span<const double> x, int grid_points_per_axis) const;

private:
    void check_x(std::span<const double> x) const;
    double f7_scale(std::span<const double> z) const;
    double eval_with_z(std::span<const double> x, std::span<const double> z, std::span<const double> y) const;

    ProblemSpec spec_;
    InteractionMatrix B_;
    BoxDomain x_domain_;
    BoxDomain y_domain_;
    double alpha_ = 0.0;
    std::size_t dy_star_ = 0;
    Vector f11_coef_;   // 10^{-3i/d_y}
    Vector f11_inv_;    // 10^{3i/d_y}
    Optimum optimum_;
};

} // namespace minmax
