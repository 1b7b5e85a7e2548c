#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "minmax/rng.hpp"

namespace minmax {

using Vector = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
bool all_finite(std::span<const double> a);

/// Dense row-major matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    Matrix transposed() const;
    Vector multiply(std::span<const double> v) const;
    Matrix multiply(const Matrix& other) const;
    double frobenius_norm() const;
    std::span<const double> data() const noexcept { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Dense symmetric matrix. Writes go through set(), which mirrors the entry,
/// so entries(i, j) == entries(j, i) holds bit-for-bit.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(std::size_t dim, double fill = 0.0);

    static SymMatrix identity(std::size_t dim, double scale = 1.0);
    static SymMatrix diagonal(std::span<const double> diag);
    static SymMatrix from_matrix(const Matrix& m); // symmetrizes (m + m^T) / 2

    std::size_t dim() const noexcept { return dim_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }
    void set(std::size_t i, std::size_t j, double value);

    /// Row-major view of the full storage.
    std::span<const double> data() const noexcept { return data_; }

    /// this = alpha * this + beta * v v^T
    void rank_one_update(double alpha, double beta, std::span<const double> v);
    void scale(double factor);
    /// this = D this D with D = diag(factors).
    void scale_coordinates(std::span<const double> factors);

    Vector multiply(std::span<const double> v) const;
    double frobenius_norm() const;
    Matrix to_matrix() const;

private:
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

struct EigenDecomposition {
    Vector values;  // ascending
    Matrix vectors; // column k is the eigenvector for values[k]
};

/// Symmetric eigendecomposition (Householder tridiagonalization + implicit QL).
/// Throws InvalidInput on non-finite entries.
EigenDecomposition eigh(const SymMatrix& s);

/// lambda_max / lambda_min; throws NotPositiveDefinite if lambda_min <= 0.
double condition_number(const SymMatrix& s);
double condition_number(const EigenDecomposition& ed);

/// Rebuilds V diag(values) V^T.
SymMatrix reconstruct(const EigenDecomposition& ed);

/// m + V diag(sqrt(lambda)) z with z drawn as dim(m) consecutive rng.normal() calls.
/// Eigenvalues below -1e-12 * lambda_max throw NotPsd; smaller negatives are clamped to zero.
Vector sample_gaussian(std::span<const double> mean, const SymMatrix& cov, Rng& rng);
Vector sample_gaussian(std::span<const double> mean, const EigenDecomposition& cov, Rng& rng);

struct SingularValueDecomposition {
    Matrix u;      // rows x k
    Vector values; // k = min(rows, cols), descending
    Matrix v;      // cols x k
};

/// One-sided Jacobi SVD.
SingularValueDecomposition svd_jacobi(const Matrix& a);

/// Moore-Penrose inverse for the diagonal and band interaction matrices the
/// problem suite builds. Diagonal input uses the closed form; anything else
/// goes through svd_jacobi. Throws RankDeficient when B lacks full rank.
Matrix pseudo_inverse(const Matrix& b);

} // namespace minmax
