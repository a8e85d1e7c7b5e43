#include "countar/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "countar/errors.hpp"

namespace countar {

namespace {

std::string shape(const Matrix& m)
{
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_square(const Matrix& m, const char* op)
{
    if (!m.is_square())
        throw DimensionError(std::string(op) + ": expected a square matrix, got " + shape(m));
}

double l1_norm(const Matrix& m)
{
    double best = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i)
            col += std::abs(m(i, j));
        best = std::max(best, col);
    }
    return best;
}

double linf_norm(const Matrix& m)
{
    double best = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j)
            row += std::abs(m(i, j));
        best = std::max(best, row);
    }
    return best;
}

double euclidean(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v)
        s += x * x;
    return std::sqrt(s);
}

struct PowerResult {
    double eigenvalue = 0.0;
    bool converged = false;
};

// Power iteration for the top eigenvalue of the symmetric PSD matrix g.
PowerResult power_iteration(const Matrix& g, Vector v)
{
    constexpr double kTol = 1e-10;
    constexpr int kMaxIter = 10000;

    double nv = euclidean(v);
    for (double& x : v)
        x /= nv;

    PowerResult out;
    double previous = -1.0;
    for (int it = 0; it < kMaxIter; ++it) {
        Vector w = g * v;
        double rayleigh = std::inner_product(v.begin(), v.end(), w.begin(), 0.0);
        double nw = euclidean(w);
        if (nw == 0.0) {
            out.eigenvalue = 0.0;
            return out;
        }
        for (std::size_t i = 0; i < w.size(); ++i)
            v[i] = w[i] / nw;
        out.eigenvalue = rayleigh;
        if (previous >= 0.0 && std::abs(rayleigh - previous) <= kTol * std::max(rayleigh, 1e-300)) {
            out.converged = true;
            return out;
        }
        previous = rayleigh;
    }
    return out;
}

double l2_norm(const Matrix& m)
{
    Matrix gram = m.transpose() * m;
    const std::size_t n = gram.rows();

    PowerResult first = power_iteration(gram, Vector(n, 1.0));
    double top = first.eigenvalue;
    // The all-ones start can be orthogonal to the dominant singular vector
    // (or the iteration can stall on a near-tie); one perturbed restart.
    if (!first.converged || top == 0.0) {
        Vector start(n);
        for (std::size_t i = 0; i < n; ++i)
            start[i] = 1.0 + 0.5 * std::sin(1.0 + 3.0 * static_cast<double>(i));
        top = std::max(top, power_iteration(gram, std::move(start)).eigenvalue);
    }
    return std::sqrt(std::max(top, 0.0));
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries))
{
    if (rows_ == 0 || cols_ == 0)
        throw DimensionError("matrix must have at least one row and one column");
    if (rows_ * cols_ != entries_.size())
        throw DimensionError("matrix " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                             " needs " + std::to_string(rows_ * cols_) + " entries, got " +
                             std::to_string(entries_.size()));
    for (double x : entries_)
        if (!std::isfinite(x))
            throw DomainError("matrix entries must be finite");
}

Matrix Matrix::zeros(std::size_t rows, std::size_t cols)
{
    return Matrix(rows, cols, std::vector<double>(rows * cols, 0.0));
}

Matrix Matrix::identity(std::size_t n)
{
    Matrix m = zeros(n, n);
    for (std::size_t i = 0; i < n; ++i)
        m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows)
{
    if (rows.empty())
        throw DimensionError("matrix must have at least one row");
    const std::size_t cols = rows.front().size();
    std::vector<double> entries;
    entries.reserve(rows.size() * cols);
    for (const auto& r : rows) {
        if (r.size() != cols)
            throw DimensionError("ragged matrix rows");
        entries.insert(entries.end(), r.begin(), r.end());
    }
    return Matrix(rows.size(), cols, std::move(entries));
}

std::vector<std::vector<double>> Matrix::to_rows() const
{
    std::vector<std::vector<double>> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        out[i].assign(entries_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                      entries_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
    return out;
}

Matrix Matrix::transpose() const
{
    Matrix t = zeros(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            t(j, i) = (*this)(i, j);
    return t;
}

bool Matrix::all_nonnegative() const noexcept
{
    return std::all_of(entries_.begin(), entries_.end(), [](double x) { return x >= 0.0; });
}

Matrix operator+(const Matrix& a, const Matrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("cannot add " + shape(a) + " and " + shape(b));
    Matrix out = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            out(i, j) += b(i, j);
    return out;
}

Matrix operator*(const Matrix& a, const Matrix& b)
{
    if (a.cols() != b.rows())
        throw DimensionError("cannot multiply " + shape(a) + " by " + shape(b));
    Matrix out = Matrix::zeros(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0)
                continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                out(i, j) += aik * b(k, j);
        }
    return out;
}

Matrix operator*(double c, const Matrix& m)
{
    Matrix out = m;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            out(i, j) *= c;
    return out;
}

Vector operator*(const Matrix& m, std::span<const double> x)
{
    if (m.cols() != x.size())
        throw DimensionError("cannot apply " + shape(m) + " to a vector of length " +
                             std::to_string(x.size()));
    Vector out(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            out[i] += m(i, j) * x[j];
    return out;
}

Matrix sum(std::span<const Matrix> terms)
{
    if (terms.empty())
        throw DimensionError("sum of an empty matrix list");
    Matrix out = terms.front();
    for (std::size_t k = 1; k < terms.size(); ++k)
        out = out + terms[k];
    return out;
}

double matrix_norm(const Matrix& m, NormKind kind)
{
    require_square(m, "matrix_norm");
    switch (kind) {
    case NormKind::L1:
        return l1_norm(m);
    case NormKind::LInf:
        return linf_norm(m);
    case NormKind::L2:
        return l2_norm(m);
    }
    throw DomainError("matrix_norm: unknown norm kind");
}

Matrix entrywise_abs(const Matrix& m)
{
    Matrix out = m;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            out(i, j) = std::abs(m(i, j));
    return out;
}

double spectral_radius(const Matrix& m)
{
    require_square(m, "spectral_radius");

    constexpr double kTol = 1e-10;
    constexpr int kMaxSquarings = 64;

    double norm = l1_norm(m);
    if (norm == 0.0)
        return 0.0;

    // Invariant: M^(2^k) = exp(log_scale) * current, with |current|_1 = 1.
    Matrix current = (1.0 / norm) * m;
    double log_scale = std::log(norm);
    double exponent = 1.0;  // 2^k
    double estimate = norm;

    for (int k = 0; k < kMaxSquarings; ++k) {
        Matrix squared = current * current;
        double sq_norm = l1_norm(squared);
        if (sq_norm == 0.0)
            return 0.0;  // nilpotent
        log_scale = 2.0 * log_scale + std::log(sq_norm);
        exponent *= 2.0;
        current = (1.0 / sq_norm) * squared;

        double next = std::exp(log_scale / exponent);
        if (std::abs(next - estimate) < kTol)
            return next;
        estimate = next;
    }
    return estimate;
}

Matrix companion(std::span<const Matrix> blocks)
{
    if (blocks.empty())
        throw DimensionError("companion: need at least one block");
    const std::size_t e = blocks.front().rows();
    for (const Matrix& b : blocks) {
        if (!b.is_square() || b.rows() != e)
            throw DimensionError("companion: blocks must all be " + std::to_string(e) + "x" +
                                 std::to_string(e) + ", got " + shape(b));
        if (!b.all_nonnegative())
            throw DomainError("companion: blocks must have nonnegative entries");
    }

    const std::size_t q = blocks.size();
    Matrix f = Matrix::zeros(q * e, q * e);
    for (std::size_t k = 0; k < q; ++k)
        for (std::size_t i = 0; i < e; ++i)
            for (std::size_t j = 0; j < e; ++j)
                f(i, k * e + j) = blocks[k](i, j);
    for (std::size_t i = e; i < q * e; ++i)
        f(i, i - e) = 1.0;
    return f;
}

Vector solve(const Matrix& a, std::span<const double> b)
{
    require_square(a, "solve");
    const std::size_t n = a.rows();
    if (b.size() != n)
        throw DimensionError("solve: right-hand side has length " + std::to_string(b.size()) +
                             ", expected " + std::to_string(n));

    Matrix lu = a;
    Vector x(b.begin(), b.end());
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(lu(r, col)) > std::abs(lu(pivot, col)))
                pivot = r;
        if (lu(pivot, col) == 0.0)
            throw NumericError("solve: singular matrix");
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j)
                std::swap(lu(col, j), lu(pivot, j));
            std::swap(x[col], x[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = lu(r, col) / lu(col, col);
            if (factor == 0.0)
                continue;
            for (std::size_t j = col; j < n; ++j)
                lu(r, j) -= factor * lu(col, j);
            x[r] -= factor * x[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double acc = x[i];
        for (std::size_t j = i + 1; j < n; ++j)
            acc -= lu(i, j) * x[j];
        x[i] = acc / lu(i, i);
    }
    return x;
}

Vector stationary_mean(std::span<const double> d, const Matrix& e_total)
{
    require_square(e_total, "stationary_mean");
    if (d.size() != e_total.rows())
        throw DimensionError("stationary_mean: offset has length " + std::to_string(d.size()) +
                             ", matrix is " + shape(e_total));
    if (!e_total.all_nonnegative())
        throw DomainError("stationary_mean: matrix must be nonnegative");
    for (double x : d)
        if (!(x >= 0.0) || !std::isfinite(x))
            throw DomainError("stationary_mean: offset must be finite and nonnegative");

    const double rho = spectral_radius(e_total);
    if (!(rho < 1.0))
        throw StationarityError("stationary_mean: spectral radius " + std::to_string(rho) +
                                " is not below 1");

    const std::size_t n = e_total.rows();
    Matrix system = Matrix::identity(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            system(i, j) -= e_total(i, j);
    Vector m = solve(system, d);
    // (I - E)^-1 = sum E^k is nonnegative; clear roundoff below zero.
    for (double& x : m)
        if (x < 0.0 && x > -1e-12)
            x = 0.0;
    return m;
}

Matrix cholesky(const Matrix& m)
{
    require_square(m, "cholesky");
    constexpr double kPivotTol = 1e-12;
    const std::size_t n = m.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(m(i, j) - m(j, i)) > kPivotTol)
                throw DomainError("cholesky: matrix is not symmetric");

    Matrix l = Matrix::zeros(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = m(j, j);
        for (std::size_t k = 0; k < j; ++k)
            diag -= l(j, k) * l(j, k);
        if (diag < -kPivotTol)
            throw DomainError("cholesky: matrix is not positive semidefinite");
        if (diag <= kPivotTol) {
            // Rank-deficient direction: column j below the diagonal must vanish too.
            for (std::size_t i = j + 1; i < n; ++i) {
                double off = m(i, j);
                for (std::size_t k = 0; k < j; ++k)
                    off -= l(i, k) * l(j, k);
                if (std::abs(off) > 1e-9)
                    throw DomainError("cholesky: matrix is not positive semidefinite");
            }
            continue;
        }
        const double ljj = std::sqrt(diag);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double off = m(i, j);
            for (std::size_t k = 0; k < j; ++k)
                off -= l(i, k) * l(j, k);
            l(i, j) = off / ljj;
        }
    }
    return l;
}

}  // namespace countar
