#include "minmax/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "minmax/errors.hpp"

namespace minmax {

namespace {

// sign(0) = +1
double sgn(double v) { return v < 0.0 ? -1.0 : 1.0; }

double clip_scalar(double v, double bound) { return std::clamp(v, -bound, bound); }

} // namespace

// ------------------------------------------------------------- BoxDomain

BoxDomain::BoxDomain(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size() || lower.empty()) throw InvalidInput("BoxDomain: bound sizes differ or are empty");
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (!(lower[i] < upper[i])) throw InvalidInput("BoxDomain: lower bound must be below upper bound");
}

BoxDomain BoxDomain::uniform(std::size_t dim, double lo, double hi) { return BoxDomain(Vector(dim, lo), Vector(dim, hi)); }

bool BoxDomain::contains(std::span<const double> v) const {
    if (v.size() != dim()) return false;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!(v[i] >= lower[i] && v[i] <= upper[i])) return false;
    return true;
}

Vector BoxDomain::clip(std::span<const double> v) const {
    Vector out(v.begin(), v.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], lower[i], upper[i]);
    return out;
}

Vector BoxDomain::sample_uniform(Rng& rng) const {
    Vector out(dim());
    for (std::size_t i = 0; i < dim(); ++i) out[i] = rng.uniform(lower[i], upper[i]);
    return out;
}

// ------------------------------------------------------------ identifiers

std::string to_string(ProblemId id) { return "f" + std::to_string(static_cast<int>(id)); }

ProblemId parse_problem_id(std::string_view s) {
    if (s.size() >= 2 && (s[0] == 'f' || s[0] == 'F')) {
        int n = 0;
        for (std::size_t i = 1; i < s.size(); ++i) {
            if (s[i] < '0' || s[i] > '9') throw InvalidInput("unknown problem id '" + std::string(s) + "'");
            n = n * 10 + (s[i] - '0');
            if (n > 11) break;
        }
        if (n >= 1 && n <= 11) return static_cast<ProblemId>(n);
    }
    throw InvalidInput("unknown problem id '" + std::string(s) + "'");
}

char to_char(SaddleCategory c) {
    switch (c) {
    case SaddleCategory::S: return 'S';
    case SaddleCategory::W: return 'W';
    case SaddleCategory::N: return 'N';
    case SaddleCategory::C: return 'C';
    }
    return '?';
}

std::string to_string(MatrixKind k) { return k == MatrixKind::Diagonal ? "diag" : "band"; }

MatrixKind parse_matrix_kind(std::string_view s) {
    if (s == "diag") return MatrixKind::Diagonal;
    if (s == "band") return MatrixKind::Band;
    throw InvalidInput("unknown matrix kind '" + std::string(s) + "' (expected diag or band)");
}

// ----------------------------------------------------- InteractionMatrix

InteractionMatrix InteractionMatrix::diagonal(std::size_t dim, double b) {
    if (dim == 0) throw InvalidInput("InteractionMatrix: dimension must be positive");
    InteractionMatrix m;
    m.kind_ = MatrixKind::Diagonal;
    m.dx_ = m.dy_ = dim;
    m.width_ = 1;
    m.value_ = b;
    return m;
}

InteractionMatrix InteractionMatrix::band(std::size_t dx, std::size_t dy, double value) {
    if (dx == 0 || dy == 0) throw InvalidInput("InteractionMatrix: dimensions must be positive");
    InteractionMatrix m;
    m.kind_ = MatrixKind::Band;
    m.dx_ = dx;
    m.dy_ = dy;
    m.width_ = (dx > dy ? dx - dy : dy - dx) + 1;
    m.value_ = value;
    return m;
}

void InteractionMatrix::transpose_times(std::span<const double> x, std::span<double> out) const {
    if (kind_ == MatrixKind::Diagonal) {
        for (std::size_t i = 0; i < dx_; ++i) out[i] = value_ * x[i];
        return;
    }
    for (std::size_t j = 0; j < dy_; ++j) {
        // rows i with B[i][j] != 0
        std::size_t lo, hi;
        if (dx_ <= dy_) {
            lo = j + 1 >= width_ ? j + 1 - width_ : 0;
            hi = std::min(j, dx_ - 1);
        } else {
            lo = j;
            hi = j + width_ - 1;
        }
        double s = 0.0;
        for (std::size_t i = lo; i <= hi; ++i) s += x[i];
        out[j] = value_ * s;
    }
}

void InteractionMatrix::times(std::span<const double> y, std::span<double> out) const {
    if (kind_ == MatrixKind::Diagonal) {
        for (std::size_t i = 0; i < dx_; ++i) out[i] = value_ * y[i];
        return;
    }
    for (std::size_t i = 0; i < dx_; ++i) {
        std::size_t lo, hi;
        if (dx_ <= dy_) {
            lo = i;
            hi = i + width_ - 1;
        } else {
            lo = i + 1 >= width_ ? i + 1 - width_ : 0;
            hi = std::min(i, dy_ - 1);
        }
        double s = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) s += y[j];
        out[i] = value_ * s;
    }
}

Matrix InteractionMatrix::dense() const {
    Matrix m(dx_, dy_);
    Vector e(dy_, 0.0), col(dx_);
    for (std::size_t j = 0; j < dy_; ++j) {
        e[j] = 1.0;
        times(e, col);
        for (std::size_t i = 0; i < dx_; ++i) m(i, j) = col[i];
        e[j] = 0.0;
    }
    return m;
}

// ---------------------------------------------------------------- Problem

Problem::Problem(const ProblemSpec& spec) : spec_(spec) {
    const int n = static_cast<int>(spec.id);
    if (n < 1 || n > 11) throw InvalidInput("problem id out of range");
    if (spec.dx == 0 || spec.dy == 0) throw InvalidInput("dx and dy must be positive");
    if (!(spec.by > 0.0) || !std::isfinite(spec.by)) throw InvalidInput("by must be positive and finite");
    if (!std::isfinite(spec.b)) throw InvalidInput("b must be finite");
    if (!(spec.gamma > 0.0) || !std::isfinite(spec.gamma)) throw InvalidInput("gamma must be positive");
    if (!(spec.x_lower < spec.x_upper)) throw InvalidInput("x_lower must be below x_upper");

    if (spec.matrix == MatrixKind::Diagonal) {
        if (spec.dx != spec.dy) throw InvalidInput("diagonal interaction matrix requires dx == dy");
        B_ = InteractionMatrix::diagonal(spec.dx, spec.b);
    } else {
        B_ = InteractionMatrix::band(spec.dx, spec.dy, spec.b);
    }

    const auto id = spec.id;
    if (!spec.bounded && id != ProblemId::F5 && id != ProblemId::F7 && id != ProblemId::F11)
        throw Unsupported("unbounded mode is only available for f5, f7 and f11");
    if (id == ProblemId::F3 && spec.matrix != MatrixKind::Diagonal)
        throw Unsupported("f3 is only supported with a diagonal interaction matrix");
    if (id == ProblemId::F10 && (spec.matrix != MatrixKind::Diagonal || spec.b != 1.0))
        throw Unsupported("f10 requires B = I");
    if (id == ProblemId::F11 && spec.dx != spec.dy) throw Unsupported("f11 requires dx == dy");

    x_domain_ = BoxDomain::uniform(spec.dx, spec.x_lower, spec.x_upper);
    y_domain_ = BoxDomain::uniform(spec.dy, -spec.by, spec.by);
    dy_star_ = std::min<std::size_t>(spec.dy, 3);

    f11_coef_.resize(spec.dy);
    f11_inv_.resize(spec.dy);
    for (std::size_t i = 0; i < spec.dy; ++i) {
        const double e = 3.0 * static_cast<double>(i + 1) / static_cast<double>(spec.dy);
        f11_coef_[i] = std::pow(10.0, -e);
        f11_inv_[i] = std::pow(10.0, e);
    }

    if (id == ProblemId::F3) {
        if (spec.b == 0.0) throw Unsupported("f3 requires B of full column rank");
        const Matrix pinv = pseudo_inverse(B_.dense());
        double max_l1 = 0.0;
        for (std::size_t j = 0; j < pinv.cols(); ++j) {
            double l1 = 0.0;
            for (std::size_t i = 0; i < pinv.rows(); ++i) l1 += std::abs(pinv(i, j));
            max_l1 = std::max(max_l1, l1);
        }
        alpha_ = -std::min(std::abs(spec.x_upper), std::abs(spec.x_lower)) / ((30.0 / 7.0) * max_l1);
    }

    // Optimum. F is separable per coordinate and convex in z for f3 and f9
    // with diagonal B, so clipping the unconstrained target is exact.
    optimum_.x_star.assign(spec.dx, 0.0);
    if (id == ProblemId::F3) {
        for (auto& v : optimum_.x_star) v = std::clamp(alpha_ / spec.b, spec.x_lower, spec.x_upper);
    } else if (id == ProblemId::F9) {
        Vector target(spec.dy, 0.0);
        for (std::size_t i = 0; i < dy_star_; ++i) target[i] = -std::sinh(1.0);
        if (spec.matrix == MatrixKind::Diagonal) {
            if (spec.b == 0.0) throw Unsupported("f9 optimum undefined for B = 0");
            for (std::size_t i = 0; i < spec.dx; ++i)
                optimum_.x_star[i] = std::clamp(target[i] / spec.b, spec.x_lower, spec.x_upper);
        } else {
            // Solve B^T x = target in the least-squares sense and accept only exact solutions.
            const Matrix bt = B_.dense().transposed();
            Matrix pinv;
            try {
                pinv = pseudo_inverse(bt);
            } catch (const RankDeficient&) {
                throw Unsupported("f9 optimum condition has no solution for this B");
            }
            optimum_.x_star = pinv.multiply(target);
            Vector z(spec.dy);
            B_.transpose_times(optimum_.x_star, z);
            for (std::size_t i = 0; i < spec.dy; ++i)
                if (std::abs(z[i] - target[i]) > 1e-9) throw Unsupported("f9 optimum condition has no solution for this B");
            if (!x_domain_.contains(optimum_.x_star)) throw Unsupported("f9 optimum lies outside the x domain");
        }
    }
    optimum_.F_star = worst_case_value(optimum_.x_star);
}

SaddleCategory Problem::category() const noexcept {
    switch (spec_.id) {
    case ProblemId::F1:
    case ProblemId::F2: return SaddleCategory::W;
    case ProblemId::F4:
    case ProblemId::F9:
    case ProblemId::F10: return SaddleCategory::N;
    case ProblemId::F3:
    case ProblemId::F6:
    case ProblemId::F8: return SaddleCategory::S;
    default: return SaddleCategory::C;
    }
}

void Problem::check_x(std::span<const double> x) const {
    if (x.size() != spec_.dx) throw InvalidInput("x has dimension " + std::to_string(x.size()) + ", expected " + std::to_string(spec_.dx));
}

double Problem::evaluate(std::span<const double> x, std::span<const double> y, FcallCounter& counter) const {
    counter.add(1);
    return value(x, y);
}

double Problem::value(std::span<const double> x, std::span<const double> y) const {
    check_x(x);
    if (y.size() != spec_.dy) throw InvalidInput("y has dimension " + std::to_string(y.size()) + ", expected " + std::to_string(spec_.dy));
    thread_local Vector z;
    z.resize(spec_.dy);
    B_.transpose_times(x, z);
    return eval_with_z(x, z, y);
}

double Problem::eval_with_z(std::span<const double> x, std::span<const double> z, std::span<const double> y) const {
    const std::size_t dx = spec_.dx;
    const std::size_t dy = spec_.dy;
    const double zy = dot(z, y);
    switch (spec_.id) {
    case ProblemId::F1: return zy;
    case ProblemId::F2: return 0.5 * dot(x, x) + zy;
    case ProblemId::F3: {
        const double shift = alpha_ - spec_.gamma * spec_.by;
        double s = 0.0;
        for (std::size_t i = 0; i < dy; ++i) s += (z[i] - shift) * (z[i] - shift);
        return 0.5 * s + spec_.gamma * zy;
    }
    case ProblemId::F4: return 0.5 * dot(x, x) + zy + 0.5 * dot(y, y);
    case ProblemId::F5: return 0.5 * dot(x, x) + zy - 0.5 * dot(y, y);
    case ProblemId::F6: {
        double x1 = 0.0, y1 = 0.0;
        for (std::size_t i = 0; i < dx; ++i) x1 += std::abs(x[i]);
        for (std::size_t i = 0; i < dy; ++i) y1 += std::abs(y[i]);
        return 0.5 * dot(x, x) + x1 + zy - y1 - 0.5 * dot(y, y);
    }
    case ProblemId::F7: {
        const double xx = dot(x, x);
        const double yy = dot(y, y);
        return 0.25 * xx * xx + zy - 0.25 * yy * yy;
    }
    case ProblemId::F8: {
        double x1 = 0.0, y1 = 0.0;
        for (std::size_t i = 0; i < dx; ++i) x1 += std::abs(x[i]);
        for (std::size_t i = 0; i < dy; ++i) y1 += std::abs(y[i]);
        return x1 + zy - y1;
    }
    case ProblemId::F9: {
        const double pi_over_by = std::acos(-1.0) / spec_.by;
        double s = 0.0;
        for (std::size_t i = 0; i < dy_star_; ++i) {
            const double t = z[i] + std::exp(sgn(y[i])) * std::sin(pi_over_by * y[i]);
            s += t * t;
        }
        for (std::size_t i = dy_star_; i < dy; ++i) s += z[i] * z[i] - y[i] * y[i];
        return s;
    }
    case ProblemId::F10: {
        double s = 0.0;
        for (std::size_t i = 0; i < dy; ++i) {
            const double d = y[i] - z[i];
            s += z[i] * z[i] - 2.0 * d * d;
        }
        return s;
    }
    case ProblemId::F11: {
        double s = 0.0;
        for (std::size_t i = 0; i < dy; ++i)
            s += 0.5 * x[i] * x[i] + f11_coef_[i] * z[i] * y[i] - 0.5 * f11_coef_[i] * f11_coef_[i] * y[i] * y[i];
        return s;
    }
    }
    return 0.0;
}

// Returns s = ||y||^2 at the maximizer of z.y - ||y||^4/4 over the y box, so
// that y_i = clip(z_i / s). Unclipped this is ||z||^{2/3}; with clipping s
// solves s = sum_i min(|z_i|/s, b_y)^2, whose right side decreases in s.
double Problem::f7_scale(std::span<const double> z) const {
    const double s0 = std::cbrt(dot(z, z));
    if (!spec_.bounded || s0 == 0.0) return s0;
    const double by = spec_.by;
    auto residual = [&](double s) {
        double r = 0.0;
        for (double zi : z) {
            const double v = std::min(std::abs(zi) / s, by);
            r += v * v;
        }
        return s - r;
    };
    if (residual(s0) <= 0.0) return s0; // nothing clipped
    double lo = 0.0;
    double hi = s0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (residual(mid) < 0.0) lo = mid;
        else hi = mid;
    }
    return hi;
}

Vector Problem::worst_scenario(std::span<const double> x) const {
    check_x(x);
    const std::size_t dy = spec_.dy;
    const double by = spec_.by;
    const bool bounded = spec_.bounded;
    Vector z(dy);
    B_.transpose_times(x, z);
    Vector y(dy, 0.0);
    switch (spec_.id) {
    case ProblemId::F1:
    case ProblemId::F2:
    case ProblemId::F3:
    case ProblemId::F4:
        for (std::size_t i = 0; i < dy; ++i) y[i] = by * sgn(z[i]);
        break;
    case ProblemId::F5:
    case ProblemId::F10:
        for (std::size_t i = 0; i < dy; ++i) y[i] = bounded ? clip_scalar(z[i], by) : z[i];
        break;
    case ProblemId::F6:
        for (std::size_t i = 0; i < dy; ++i) {
            const double a = std::abs(z[i]);
            if (a <= 1.0) y[i] = 0.0;
            else if (a <= by + 1.0) y[i] = z[i] - sgn(z[i]);
            else y[i] = by * sgn(z[i]);
        }
        break;
    case ProblemId::F7: {
        const double s = f7_scale(z);
        if (s == 0.0) break;
        for (std::size_t i = 0; i < dy; ++i) y[i] = bounded ? clip_scalar(z[i] / s, by) : z[i] / s;
        break;
    }
    case ProblemId::F8:
        for (std::size_t i = 0; i < dy; ++i) y[i] = std::abs(z[i]) <= 1.0 ? 0.0 : by * sgn(z[i]);
        break;
    case ProblemId::F9:
        for (std::size_t i = 0; i < dy_star_; ++i) y[i] = z[i] >= -std::sinh(1.0) ? by / 2.0 : -by / 2.0;
        break;
    case ProblemId::F11:
        for (std::size_t i = 0; i < dy; ++i) {
            const double v = f11_inv_[i] * z[i];
            y[i] = bounded ? clip_scalar(v, by) : v;
        }
        break;
    }
    return y;
}

double Problem::worst_case_value(std::span<const double> x) const {
    const Vector y = worst_scenario(x);
    return value(x, y);
}

double Problem::brute_force_worst_case(std::span<const double> x, int grid_points_per_axis) const {
    check_x(x);
    if (spec_.dy > 3) throw Unsupported("brute force worst case requires dy <= 3");
    if (grid_points_per_axis < 2) throw InvalidInput("grid needs at least two points per axis");
    const std::size_t dy = spec_.dy;
    const int g = grid_points_per_axis;
    std::size_t total = 1;
    for (std::size_t i = 0; i < dy; ++i) total *= static_cast<std::size_t>(g);
    Vector y(dy);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t r = flat;
        for (std::size_t i = 0; i < dy; ++i) {
            const int k = static_cast<int>(r % static_cast<std::size_t>(g));
            r /= static_cast<std::size_t>(g);
            // endpoints exact
            y[i] = k == g - 1 ? spec_.by : -spec_.by + 2.0 * spec_.by * k / (g - 1);
        }
        best = std::max(best, value(x, y));
    }
    return best;
}

} // namespace minmax
