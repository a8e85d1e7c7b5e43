#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace countar {

using Vector = std::vector<double>;

/// Dense row-major real matrix. Shapes and finiteness are checked on
/// construction; a Matrix is never empty.
class Matrix {
public:
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

    /// rows x cols of zeros.
    static Matrix zeros(std::size_t rows, std::size_t cols);
    static Matrix identity(std::size_t n);
    /// Builds from nested rows; all rows must have the same length.
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }
    std::span<const double> entries() const noexcept { return entries_; }

    double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }

    std::vector<std::vector<double>> to_rows() const;
    Matrix transpose() const;
    bool all_nonnegative() const noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    Matrix() = default;

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> entries_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double c, const Matrix& m);
Vector operator*(const Matrix& m, std::span<const double> x);

/// Sum of a nonempty list of equally shaped matrices.
Matrix sum(std::span<const Matrix> terms);

enum class NormKind { L1, L2, LInf };

/// Operator norm induced by the l1, l2 or l-infinity vector norm. Square
/// matrices only.
double matrix_norm(const Matrix& m, NormKind kind);

/// |m| taken entry by entry.
Matrix entrywise_abs(const Matrix& m);

/// Spectral radius by repeated squaring: rho(M) = lim |M^(2^k)|_1^(1/2^k).
/// Each square is rescaled to unit l1 norm and the scale is tracked in log
/// space, so neither overflow nor underflow occurs. Works for any sign
/// pattern and for reducible matrices.
double spectral_radius(const Matrix& m);

/// Block companion matrix of E_1..E_q (each e x e, nonnegative):
///
///     [ E_1 E_2 ... E_q ]
///     [ I_(q-1)e    0   ]
Matrix companion(std::span<const Matrix> blocks);

/// Solves (I - E) m = d. Requires rho(E) < 1 and nonnegative E, d.
Vector stationary_mean(std::span<const double> d, const Matrix& e_total);

/// Gaussian elimination with partial pivoting. Throws NumericError when a
/// pivot vanishes.
Vector solve(const Matrix& a, std::span<const double> b);

/// Lower-triangular L with L L' = m, for symmetric positive semidefinite m.
/// Throws DomainError if m is not PSD (within a 1e-12 pivot tolerance).
Matrix cholesky(const Matrix& m);

}  // namespace countar
