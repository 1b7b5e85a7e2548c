#include "minmax/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "minmax/errors.hpp"

namespace minmax {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

bool all_finite(std::span<const double> a) {
    return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------- Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Vector Matrix::multiply(std::span<const double> v) const {
    if (v.size() != cols_) throw InvalidInput("Matrix::multiply: dimension mismatch");
    Vector out(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        const double* row = &data_[i * cols_];
        double s = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) s += row[j] * v[j];
        out[i] = s;
    }
    return out;
}

Matrix Matrix::multiply(const Matrix& other) const {
    if (other.rows_ != cols_) throw InvalidInput("Matrix::multiply: dimension mismatch");
    Matrix out(rows_, other.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = 0; k < cols_; ++k) {
            const double a = (*this)(i, k);
            if (a == 0.0) continue;
            for (std::size_t j = 0; j < other.cols_; ++j) out(i, j) += a * other(k, j);
        }
    return out;
}

double Matrix::frobenius_norm() const { return norm2(data_); }

// ------------------------------------------------------------- SymMatrix

SymMatrix::SymMatrix(std::size_t dim, double fill) : dim_(dim), data_(dim * dim, fill) {}

SymMatrix SymMatrix::identity(std::size_t dim, double scale) {
    SymMatrix s(dim);
    for (std::size_t i = 0; i < dim; ++i) s.data_[i * dim + i] = scale;
    return s;
}

SymMatrix SymMatrix::diagonal(std::span<const double> diag) {
    SymMatrix s(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) s.data_[i * diag.size() + i] = diag[i];
    return s;
}

SymMatrix SymMatrix::from_matrix(const Matrix& m) {
    if (m.rows() != m.cols()) throw InvalidInput("SymMatrix::from_matrix: matrix is not square");
    SymMatrix s(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i; j < m.cols(); ++j) s.set(i, j, 0.5 * (m(i, j) + m(j, i)));
    return s;
}

void SymMatrix::set(std::size_t i, std::size_t j, double value) {
    data_[i * dim_ + j] = value;
    data_[j * dim_ + i] = value;
}

void SymMatrix::rank_one_update(double alpha, double beta, std::span<const double> v) {
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t j = i; j < dim_; ++j) {
            const double value = alpha * data_[i * dim_ + j] + beta * v[i] * v[j];
            data_[i * dim_ + j] = value;
            data_[j * dim_ + i] = value;
        }
    }
}

void SymMatrix::scale(double factor) {
    for (double& v : data_) v *= factor;
}

void SymMatrix::scale_coordinates(std::span<const double> factors) {
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = 0; j < dim_; ++j) data_[i * dim_ + j] *= factors[i] * factors[j];
}

Vector SymMatrix::multiply(std::span<const double> v) const {
    Vector out(dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
        const double* row = &data_[i * dim_];
        double s = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) s += row[j] * v[j];
        out[i] = s;
    }
    return out;
}

double SymMatrix::frobenius_norm() const { return norm2(data_); }

Matrix SymMatrix::to_matrix() const {
    Matrix m(dim_, dim_);
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = 0; j < dim_; ++j) m(i, j) = data_[i * dim_ + j];
    return m;
}

// ------------------------------------------------------------------ eigh

namespace {

// Householder reduction to tridiagonal form. On exit v holds the accumulated
// orthogonal transform, d the diagonal and e the sub-diagonal (e[0] unused).
void tridiagonalize(Matrix& v, Vector& d, Vector& e) {
    const std::size_t n = v.rows();
    for (std::size_t j = 0; j < n; ++j) d[j] = v(n - 1, j);

    for (std::size_t i = n - 1; i > 0; --i) {
        double scale = 0.0;
        double h = 0.0;
        for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
        if (scale == 0.0) {
            e[i] = d[i - 1];
            for (std::size_t j = 0; j < i; ++j) {
                d[j] = v(i - 1, j);
                v(i, j) = 0.0;
                v(j, i) = 0.0;
            }
        } else {
            for (std::size_t k = 0; k < i; ++k) {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            double f = d[i - 1];
            double g = std::sqrt(h);
            if (f > 0) g = -g;
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;

            for (std::size_t j = 0; j < i; ++j) {
                f = d[j];
                v(j, i) = f;
                g = e[j] + v(j, j) * f;
                for (std::size_t k = j + 1; k <= i - 1; ++k) {
                    g += v(k, j) * d[k];
                    e[k] += v(k, j) * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for (std::size_t j = 0; j < i; ++j) {
                e[j] /= h;
                f += e[j] * d[j];
            }
            const double hh = f / (h + h);
            for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
            for (std::size_t j = 0; j < i; ++j) {
                f = d[j];
                g = e[j];
                for (std::size_t k = j; k <= i - 1; ++k) v(k, j) -= (f * e[k] + g * d[k]);
                d[j] = v(i - 1, j);
                v(i, j) = 0.0;
            }
        }
        d[i] = h;
    }

    for (std::size_t i = 0; i + 1 < n; ++i) {
        v(n - 1, i) = v(i, i);
        v(i, i) = 1.0;
        const double h = d[i + 1];
        if (h != 0.0) {
            for (std::size_t k = 0; k <= i; ++k) d[k] = v(k, i + 1) / h;
            for (std::size_t j = 0; j <= i; ++j) {
                double g = 0.0;
                for (std::size_t k = 0; k <= i; ++k) g += v(k, i + 1) * v(k, j);
                for (std::size_t k = 0; k <= i; ++k) v(k, j) -= g * d[k];
            }
        }
        for (std::size_t k = 0; k <= i; ++k) v(k, i + 1) = 0.0;
    }
    for (std::size_t j = 0; j < n; ++j) {
        d[j] = v(n - 1, j);
        v(n - 1, j) = 0.0;
    }
    v(n - 1, n - 1) = 1.0;
    e[0] = 0.0;
}

// Implicit QL iterations on the tridiagonal matrix, accumulating into v.
void tridiagonal_ql(Matrix& v, Vector& d, Vector& e) {
    const std::size_t n = v.rows();
    for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;

    double f = 0.0;
    double tst1 = 0.0;
    const double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t l = 0; l < n; ++l) {
        tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
        std::size_t m = l;
        while (m < n) {
            if (std::abs(e[m]) <= eps * tst1) break;
            ++m;
        }
        if (m == n) m = n - 1;

        if (m > l) {
            int guard = 0;
            do {
                if (++guard > 100) break;
                double g = d[l];
                double p = (d[l + 1] - g) / (2.0 * e[l]);
                double r = std::hypot(p, 1.0);
                if (p < 0) r = -r;
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                const double dl1 = d[l + 1];
                double h = g - d[l];
                for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
                f += h;

                p = d[m];
                double c = 1.0;
                double c2 = c;
                double c3 = c;
                const double el1 = e[l + 1];
                double s = 0.0;
                double s2 = 0.0;
                for (std::size_t ii = m; ii-- > l;) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[ii];
                    h = c * p;
                    r = std::hypot(p, e[ii]);
                    e[ii + 1] = s * r;
                    s = e[ii] / r;
                    c = p / r;
                    p = c * d[ii] - s * g;
                    d[ii + 1] = h + s * (c * g + s * d[ii]);
                    for (std::size_t k = 0; k < n; ++k) {
                        h = v(k, ii + 1);
                        v(k, ii + 1) = s * v(k, ii) + c * h;
                        v(k, ii) = c * v(k, ii) - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
            } while (std::abs(e[l]) > eps * tst1);
        }
        d[l] += f;
        e[l] = 0.0;
    }

    for (std::size_t i = 0; i + 1 < n; ++i) {
        std::size_t k = i;
        double p = d[i];
        for (std::size_t j = i + 1; j < n; ++j)
            if (d[j] < p) {
                k = j;
                p = d[j];
            }
        if (k != i) {
            d[k] = d[i];
            d[i] = p;
            for (std::size_t j = 0; j < n; ++j) std::swap(v(j, i), v(j, k));
        }
    }
}

} // namespace

EigenDecomposition eigh(const SymMatrix& s) {
    if (s.dim() == 0) throw InvalidInput("eigh: empty matrix");
    if (!all_finite(s.data())) throw InvalidInput("eigh: non-finite entries");
    const std::size_t n = s.dim();
    EigenDecomposition ed{Vector(n), s.to_matrix()};
    if (n == 1) {
        ed.values[0] = s(0, 0);
        ed.vectors(0, 0) = 1.0;
        return ed;
    }
    Vector e(n, 0.0);
    tridiagonalize(ed.vectors, ed.values, e);
    tridiagonal_ql(ed.vectors, ed.values, e);
    return ed;
}

double condition_number(const EigenDecomposition& ed) {
    const double lo = ed.values.front();
    const double hi = ed.values.back();
    if (!(lo > 0.0)) throw NotPositiveDefinite("condition_number: smallest eigenvalue is not positive");
    return hi / lo;
}

double condition_number(const SymMatrix& s) { return condition_number(eigh(s)); }

SymMatrix reconstruct(const EigenDecomposition& ed) {
    const std::size_t n = ed.values.size();
    SymMatrix s(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double v = 0.0;
            for (std::size_t k = 0; k < n; ++k) v += ed.vectors(i, k) * ed.values[k] * ed.vectors(j, k);
            s.set(i, j, v);
        }
    return s;
}

Vector sample_gaussian(std::span<const double> mean, const EigenDecomposition& cov, Rng& rng) {
    const std::size_t n = mean.size();
    if (cov.values.size() != n) throw InvalidInput("sample_gaussian: dimension mismatch");
    const double lambda_max = std::max(0.0, cov.values.back());
    Vector scaled(n);
    for (std::size_t k = 0; k < n; ++k) {
        double lambda = cov.values[k];
        if (lambda < 0.0) {
            if (lambda < -1e-12 * lambda_max) throw NotPsd("sample_gaussian: covariance has a negative eigenvalue");
            lambda = 0.0;
        }
        scaled[k] = std::sqrt(lambda) * rng.normal();
    }
    Vector out(mean.begin(), mean.end());
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += cov.vectors(i, k) * scaled[k];
        out[i] += s;
    }
    return out;
}

Vector sample_gaussian(std::span<const double> mean, const SymMatrix& cov, Rng& rng) {
    if (cov.dim() != mean.size()) throw InvalidInput("sample_gaussian: dimension mismatch");
    return sample_gaussian(mean, eigh(cov), rng);
}

// ------------------------------------------------------------------- SVD

SingularValueDecomposition svd_jacobi(const Matrix& a) {
    if (a.rows() < a.cols()) {
        auto t = svd_jacobi(a.transposed());
        return {std::move(t.v), std::move(t.values), std::move(t.u)};
    }
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    Matrix u = a;
    Matrix v = Matrix::identity(n);
    const double eps = std::numeric_limits<double>::epsilon();

    for (int sweep = 0; sweep < 100; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    alpha += u(i, p) * u(i, p);
                    beta += u(i, q) * u(i, q);
                    gamma += u(i, p) * u(i, q);
                }
                if (std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double up = u(i, p);
                    const double uq = u(i, q);
                    u(i, p) = c * up - s * uq;
                    u(i, q) = s * up + c * uq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vp = v(i, p);
                    const double vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }

    Vector sigma(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += u(i, j) * u(i, j);
        sigma[j] = std::sqrt(s);
        if (sigma[j] > 0.0)
            for (std::size_t i = 0; i < m; ++i) u(i, j) /= sigma[j];
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return sigma[x] > sigma[y]; });
    SingularValueDecomposition out{Matrix(m, n), Vector(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = sigma[order[k]];
        for (std::size_t i = 0; i < m; ++i) out.u(i, k) = u(i, order[k]);
        for (std::size_t i = 0; i < n; ++i) out.v(i, k) = v(i, order[k]);
    }
    return out;
}

Matrix pseudo_inverse(const Matrix& b) {
    if (!all_finite(b.data()))
        throw InvalidInput("pseudo_inverse: non-finite entries");
    bool diagonal = b.rows() == b.cols();
    for (std::size_t i = 0; diagonal && i < b.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j)
            if (i != j && b(i, j) != 0.0) {
                diagonal = false;
                break;
            }
    if (diagonal) {
        Matrix inv(b.rows(), b.cols());
        for (std::size_t i = 0; i < b.rows(); ++i) {
            if (b(i, i) == 0.0) throw RankDeficient("pseudo_inverse: zero on the diagonal");
            inv(i, i) = 1.0 / b(i, i);
        }
        return inv;
    }

    const auto svd = svd_jacobi(b);
    const double tol =
        static_cast<double>(std::max(b.rows(), b.cols())) * std::numeric_limits<double>::epsilon() * svd.values.front();
    for (double s : svd.values)
        if (!(s > tol)) throw RankDeficient("pseudo_inverse: matrix does not have full rank");

    // B^+ = V diag(1/sigma) U^T
    Matrix inv(b.cols(), b.rows());
    for (std::size_t i = 0; i < b.cols(); ++i)
        for (std::size_t j = 0; j < b.rows(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < svd.values.size(); ++k) s += svd.v(i, k) * svd.u(j, k) / svd.values[k];
            inv(i, j) = s;
        }
    return inv;
}

} // namespace minmax
