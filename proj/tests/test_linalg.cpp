#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "countar/errors.hpp"
#include "countar/linalg.hpp"

using namespace countar;

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m)
{
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
    return out;
}

double eigen_rho(const Matrix& m)
{
    Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(m), false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double eigen_l2(const Matrix& m)
{
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m));
    return svd.singularValues()(0);
}

Matrix random_matrix(std::mt19937_64& rng, std::size_t n, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> e(n * n);
    for (double& x : e)
        x = u(rng);
    return Matrix(n, n, e);
}

}  // namespace

TEST_CASE("matrix construction rejects bad shapes and values")
{
    CHECK_THROWS_AS(Matrix(0, 0, {}), DimensionError);
    CHECK_THROWS_AS(Matrix(2, 2, {1.0, 2.0, 3.0}), DimensionError);
    CHECK_THROWS_AS(Matrix(1, 1, {std::nan("")}), DomainError);
    CHECK_THROWS_AS(Matrix::from_rows({{1.0, 2.0}, {3.0}}), DimensionError);
    CHECK_THROWS_AS(Matrix::from_rows({}), DimensionError);
}

TEST_CASE("matrix arithmetic")
{
    const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
    const Matrix b = Matrix::from_rows({{0, 1}, {1, 0}});
    CHECK(a + b == Matrix::from_rows({{1, 3}, {4, 4}}));
    CHECK(a * b == Matrix::from_rows({{2, 1}, {4, 3}}));
    CHECK(2.0 * a == Matrix::from_rows({{2, 4}, {6, 8}}));
    const std::vector<double> x{1.0, -1.0};
    CHECK(a * x == Vector{-1.0, -1.0});
    CHECK(a.transpose() == Matrix::from_rows({{1, 3}, {2, 4}}));
    CHECK_THROWS_AS(a + Matrix::identity(3), DimensionError);
    const std::vector<Matrix> terms{a, b, Matrix::identity(2)};
    CHECK(sum(terms) == Matrix::from_rows({{2, 3}, {4, 5}}));
}

TEST_CASE("induced norms on the upper triangular example")
{
    const Matrix b = Matrix::from_rows({{0.5, 0.4}, {0.0, 0.5}});
    CHECK(matrix_norm(b, NormKind::L1) == 0.9);
    CHECK(matrix_norm(b, NormKind::LInf) == 0.9);
    // Largest singular value, frozen from an SVD.
    CHECK(matrix_norm(b, NormKind::L2) == doctest::Approx(0.7385164807134507).epsilon(1e-10));
    CHECK(matrix_norm(b, NormKind::L2) >= std::sqrt(0.41));
    CHECK_THROWS_AS(matrix_norm(Matrix::zeros(2, 3), NormKind::L1), DimensionError);
}

TEST_CASE("spectral radius examples")
{
    CHECK(spectral_radius(Matrix::from_rows({{0.5, 0.4}, {0.0, 0.5}})) ==
          doctest::Approx(0.5).epsilon(1e-8));
    // Eigenvalues 0.6 and 0.35.
    CHECK(spectral_radius(Matrix::from_rows({{0.5, 0.15}, {0.1, 0.45}})) ==
          doctest::Approx(0.6).epsilon(1e-10));
    CHECK(spectral_radius(Matrix::identity(3)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(spectral_radius(Matrix::zeros(2, 2)) == 0.0);
    // Rotation by 90 degrees scaled by 0.7: complex pair of modulus 0.7.
    CHECK(spectral_radius(Matrix::from_rows({{0.0, -0.7}, {0.7, 0.0}})) ==
          doctest::Approx(0.7).epsilon(1e-10));
    // Nilpotent.
    CHECK(spectral_radius(Matrix::from_rows({{0.0, 5.0}, {0.0, 0.0}})) < 1e-8);
}

TEST_CASE("spectral radius agrees with an eigenvalue solver")
{
    std::mt19937_64 rng(12345);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 6);
        const Matrix m = random_matrix(rng, n, trial % 2 == 0 ? 0.0 : -1.0, 1.0);
        const double expected = eigen_rho(m);
        CHECK(spectral_radius(m) == doctest::Approx(expected).epsilon(1e-7));
    }
}

TEST_CASE("spectral radius properties")
{
    std::mt19937_64 rng(777);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 4);
        const Matrix m = random_matrix(rng, n, -1.0, 1.0);
        const double rho = spectral_radius(m);
        // Homogeneity.
        CHECK(spectral_radius(2.5 * m) == doctest::Approx(2.5 * rho).epsilon(1e-8));
        // Bounded by every induced norm.
        for (NormKind k : {NormKind::L1, NormKind::L2, NormKind::LInf})
            CHECK(rho <= matrix_norm(m, k) * (1 + 1e-9));
        // The l1 norm of m is the l-infinity norm of its transpose.
        CHECK(matrix_norm(m, NormKind::L1) ==
              doctest::Approx(matrix_norm(m.transpose(), NormKind::LInf)));
        CHECK(matrix_norm(m, NormKind::L2) == doctest::Approx(eigen_l2(m)).epsilon(1e-8));
    }
}

TEST_CASE("companion matrix layout and spectral radius")
{
    const std::vector<Matrix> scalar{Matrix::from_rows({{0.3}}), Matrix::from_rows({{0.2}})};
    const Matrix c = companion(scalar);
    CHECK(c == Matrix::from_rows({{0.3, 0.2}, {1.0, 0.0}}));
    // Roots of z^2 - 0.3 z - 0.2.
    CHECK(spectral_radius(c) == doctest::Approx((0.3 + std::sqrt(0.89)) / 2).epsilon(1e-10));
    CHECK(spectral_radius(c) == doctest::Approx(0.6216990566028302).epsilon(1e-10));

    const std::vector<Matrix> blocks{Matrix::from_rows({{0.1, 0.2}, {0.0, 0.3}}),
                                     Matrix::from_rows({{0.05, 0.0}, {0.1, 0.1}})};
    const Matrix big = companion(blocks);
    REQUIRE(big.rows() == 4);
    CHECK(big(0, 2) == 0.05);
    CHECK(big(2, 0) == 1.0);
    CHECK(big(3, 1) == 1.0);
    CHECK(big(2, 2) == 0.0);

    const std::vector<Matrix> bad{Matrix::identity(2), Matrix::identity(3)};
    CHECK_THROWS_AS(companion(bad), DimensionError);
    const std::vector<Matrix> negative{Matrix::from_rows({{-0.1}})};
    CHECK_THROWS_AS(companion(negative), DomainError);
}

TEST_CASE("stationary mean solves the fixed point")
{
    const Matrix e = Matrix::from_rows({{0.5, 0.15}, {0.1, 0.45}});
    const std::vector<double> d{1.0, 0.5};
    const Vector m = stationary_mean(d, e);
    CHECK(m[0] == doctest::Approx(2.403846153846154).epsilon(1e-12));
    CHECK(m[1] == doctest::Approx(1.346153846153846).epsilon(1e-12));
    const Vector em = e * m;
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(std::abs(m[i] - d[i] - em[i]) < 1e-12);

    CHECK_THROWS_AS(stationary_mean(d, Matrix::identity(2)), StationarityError);
    CHECK_THROWS_AS(stationary_mean(std::vector<double>{-1.0, 0.0}, e), DomainError);
    CHECK_THROWS_AS(stationary_mean(std::vector<double>{1.0}, e), DimensionError);
}

TEST_CASE("solve agrees with LU from Eigen")
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 5);
        const Matrix a = random_matrix(rng, n, -1.0, 1.0) + static_cast<double>(n) * Matrix::identity(n);
        std::vector<double> b(n);
        for (std::size_t i = 0; i < n; ++i)
            b[i] = static_cast<double>(i) - 1.5;
        const Vector x = solve(a, b);
        Eigen::VectorXd eb(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i)
            eb(static_cast<Eigen::Index>(i)) = b[i];
        const Eigen::VectorXd ex = to_eigen(a).partialPivLu().solve(eb);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(x[i] == doctest::Approx(ex(static_cast<Eigen::Index>(i))).epsilon(1e-10));
    }
    CHECK_THROWS_AS(solve(Matrix::from_rows({{1, 2}, {2, 4}}), std::vector<double>{1, 1}),
                    NumericError);
}

TEST_CASE("cholesky factors PSD matrices and rejects the rest")
{
    const Matrix r = Matrix::from_rows({{1.0, 0.5}, {0.5, 1.0}});
    const Matrix l = cholesky(r);
    CHECK(l(0, 1) == 0.0);
    const Matrix back = l * l.transpose();
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(back(i, j) == doctest::Approx(r(i, j)).epsilon(1e-14));
    // Singular but PSD: perfectly correlated pair.
    CHECK_NOTHROW(cholesky(Matrix::from_rows({{1.0, 1.0}, {1.0, 1.0}})));
    CHECK_THROWS_AS(cholesky(Matrix::from_rows({{1.0, 2.0}, {2.0, 1.0}})), DomainError);
    CHECK_THROWS_AS(cholesky(Matrix::from_rows({{1.0, 0.5}, {0.4, 1.0}})), DomainError);
}
