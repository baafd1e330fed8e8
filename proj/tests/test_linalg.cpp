#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "lincons/linalg.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace lincons;
using Catch::Approx;
using testsupport::max_abs_diff;

TEST_CASE("tolerance policy rejects non-positive entries") {
    TolerancePolicy tol;
    tol.rank_rel = 0.0;
    CHECK_THROWS_AS(tol.validate(), InputError);
    tol = TolerancePolicy{};
    tol.convergence_abs = -1e-6;
    CHECK_THROWS_AS(tol.validate(), InputError);
    CHECK_NOTHROW(TolerancePolicy{}.validate());
}

TEST_CASE("numeric_rank on reference matrices") {
    CHECK(numeric_rank(Matrix::Identity(4, 4)) == 4);
    CHECK(numeric_rank(Matrix::Zero(3, 3)) == 0);

    // Kernel of the two-agent system is {(a, b, a, b)}, so rank is 2; the
    // elimination oracle must agree with the SVD route.
    const Matrix A = testsupport::two_agent_planar_matrix();
    CHECK(numeric_rank(A) == 2);
    CHECK(testsupport::elimination_rank(A) == 2);
}

TEST_CASE("numeric_rank rejects non-finite input") {
    Matrix M = Matrix::Zero(2, 2);
    M(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(numeric_rank(M), InputError);
}

TEST_CASE("rank plus nullity equals the order") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Index order = 2 + static_cast<Index>(rng() % 6);
        const Index inner = static_cast<Index>(rng() % (order + 1));
        Matrix M;
        if (inner == 0) {
            M = Matrix::Zero(order, order);
        } else {
            M = testsupport::random_matrix(order, inner, rng) *
                testsupport::random_matrix(inner, order, rng);
        }
        CHECK(numeric_rank(M) + null_space_basis(M).cols() == order);
    }
}

TEST_CASE("null_space_basis spans the kernel") {
    CHECK(null_space_basis(Matrix::Identity(3, 3)).cols() == 0);

    const Matrix plane = null_space_basis(Matrix::Zero(2, 2));
    REQUIRE(plane.cols() == 2);
    CHECK(max_abs_diff(plane.transpose() * plane, Matrix::Identity(2, 2)) < 1e-12);

    const Matrix A = testsupport::two_agent_planar_matrix();
    const Matrix basis = null_space_basis(A);
    REQUIRE(basis.cols() == 2);
    CHECK(max_abs_diff(basis.transpose() * basis, Matrix::Identity(2, 2)) < 1e-12);
    CHECK((A * basis).cwiseAbs().maxCoeff() < 1e-12);

    // Solving Ax = 0 by hand gives x3 = x1 and x4 = x2.
    Matrix expected(4, 2);
    expected << 1, 0,
                0, 1,
                1, 0,
                0, 1;
    CHECK(testsupport::same_span(basis, expected));
}

TEST_CASE("left_null_space_basis annihilates from the left") {
    const Matrix A = testsupport::two_agent_planar_matrix();
    const Matrix rows = left_null_space_basis(A);
    REQUIRE(rows.rows() == 2);
    CHECK((rows * A).cwiseAbs().maxCoeff() < 1e-12);

    // y^T A = 0 forces y2 = y1 and y4 = -y3.
    Matrix expected(4, 2);
    expected << 0, 1,
                0, 1,
               -1, 0,
                1, 0;
    CHECK(testsupport::same_span(rows.transpose(), expected));

    SECTION("symmetric matrices have matching left and right kernels") {
        std::mt19937_64 rng(11);
        Matrix S = testsupport::random_matrix(4, 2, rng);
        S = S * S.transpose();  // symmetric, rank 2
        CHECK(testsupport::same_span(left_null_space_basis(S).transpose(), null_space_basis(S)));
    }

    SECTION("full-rank matrices have an empty left kernel") {
        std::mt19937_64 rng(13);
        const Matrix Q = testsupport::random_matrix(5, 5, rng);
        const Matrix invertible = Q.transpose() * Q + 0.5 * Matrix::Identity(5, 5);
        CHECK(left_null_space_basis(invertible).rows() == 0);
    }
}

TEST_CASE("eigenvalues are sorted with conjugate pairs") {
    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = -1;
    D(1, 1) = -2;
    const Spectrum spec = eigenvalues(D);
    REQUIRE(spec.eigenvalues.size() == 2);
    CHECK(spec.eigenvalues[0].real() == Approx(-2.0));
    CHECK(spec.eigenvalues[1].real() == Approx(-1.0));

    Matrix pair(2, 2);
    pair << -1, 1,
             1, -1;
    const Spectrum lap = eigenvalues(pair);
    CHECK(lap.eigenvalues[0].real() == Approx(-2.0));
    CHECK(lap.eigenvalues[1].real() == Approx(0.0).margin(1e-12));

    // det(A - lambda I) expands to lambda^2 (lambda^2 + 2 lambda + 2), so the
    // spectrum is {0, 0, -1 - i, -1 + i}.
    const Spectrum sys = eigenvalues(testsupport::two_agent_planar_matrix());
    REQUIRE(sys.eigenvalues.size() == 4);
    CHECK(std::abs(sys.eigenvalues[0] - Complex(-1.0, -1.0)) < 1e-9);
    CHECK(std::abs(sys.eigenvalues[1] - Complex(-1.0, 1.0)) < 1e-9);
    CHECK(std::abs(sys.eigenvalues[2]) < 1e-9);
    CHECK(std::abs(sys.eigenvalues[3]) < 1e-9);

    SECTION("random matrices keep exact conjugate symmetry") {
        std::mt19937_64 rng(17);
        for (int trial = 0; trial < 10; ++trial) {
            const Spectrum s = eigenvalues(testsupport::random_matrix(6, 6, rng));
            for (const Complex& lambda : s.eigenvalues) {
                if (lambda.imag() == 0.0) continue;
                const bool has_conjugate =
                    std::any_of(s.eigenvalues.begin(), s.eigenvalues.end(),
                                [&](const Complex& other) { return other == std::conj(lambda); });
                CHECK(has_conjugate);
            }
        }
    }
}

TEST_CASE("eigenvalue classification bands") {
    TolerancePolicy tol;
    Spectrum spec;
    spec.scale = 1.0;
    spec.eigenvalues = {Complex(0.0, 0.0), Complex(-0.5, 0.0), Complex(0.0, 1.0), Complex(0.3, 0.0)};
    CHECK(spec.classify(0, tol) == EigenClass::Zero);
    CHECK(spec.classify(1, tol) == EigenClass::Stable);
    CHECK(spec.classify(2, tol) == EigenClass::Unstable);  // purely imaginary is not admissible
    CHECK(spec.classify(3, tol) == EigenClass::Unstable);
}

TEST_CASE("matrix_exponential basics") {
    CHECK(max_abs_diff(matrix_exponential(Matrix::Zero(3, 3)), Matrix::Identity(3, 3)) < 1e-15);

    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = 0.3;
    D(1, 1) = -1.7;
    const Matrix E = matrix_exponential(D);
    CHECK(E(0, 0) == Approx(std::exp(0.3)).epsilon(1e-13));
    CHECK(E(1, 1) == Approx(std::exp(-1.7)).epsilon(1e-13));
    CHECK(E(0, 1) == 0.0);

    // Long-horizon propagator of the two-agent system reaches its limit.
    const Matrix A = testsupport::two_agent_planar_matrix();
    CHECK(max_abs_diff(matrix_exponential(A * 50.0), testsupport::two_agent_planar_limit()) < 1e-6);
}

TEST_CASE("matrix_exponential semigroup property") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix M = testsupport::random_matrix(6, 6, rng);
        const double s = 0.4, t = 0.9;
        const Matrix lhs = matrix_exponential(M * (s + t));
        const Matrix rhs = matrix_exponential(M * s) * matrix_exponential(M * t);
        CHECK(max_abs_diff(lhs, rhs) <= 1e-9 * lhs.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("matrix_exponential decays for strictly stable matrices") {
    // random_stable_matrix-style input: eigenvalues below -0.1, horizon 100/0.1.
    std::mt19937_64 rng(29);
    const Matrix Q = testsupport::random_matrix(5, 5, rng);
    const Matrix M = -(Q.transpose() * Q + 0.1 * Matrix::Identity(5, 5));
    CHECK(matrix_exponential(M * 1000.0).cwiseAbs().maxCoeff() < TolerancePolicy{}.convergence_abs);
}

TEST_CASE("matrix_exponential reports overflow") {
    Matrix M = Matrix::Identity(2, 2) * 1e5;
    CHECK_THROWS_AS(matrix_exponential(M), ComputationError);
}

TEST_CASE("spectral projector onto the null space") {
    CHECK(max_abs_diff(spectral_projector_onto_nullspace(Matrix::Identity(3, 3)),
                       Matrix::Zero(3, 3)) == 0.0);
    CHECK(max_abs_diff(spectral_projector_onto_nullspace(Matrix::Zero(3, 3)),
                       Matrix::Identity(3, 3)) == 0.0);

    const Matrix A = testsupport::two_agent_planar_matrix();
    const Matrix P = spectral_projector_onto_nullspace(A);
    CHECK(max_abs_diff(P, testsupport::two_agent_planar_limit()) < 1e-12);

    SECTION("projector identities") {
        CHECK(max_abs_diff(P * P, P) < 1e-8 * std::max(1.0, max_abs(P)));
        CHECK((A * P).cwiseAbs().maxCoeff() < 1e-8 * max_abs(A));
        CHECK((P * A).cwiseAbs().maxCoeff() < 1e-8 * max_abs(A));
    }

    SECTION("defective zero eigenvalue has no direct sum") {
        Matrix nilpotent(2, 2);
        nilpotent << 0, 1,
                     0, 0;
        CHECK_THROWS_AS(spectral_projector_onto_nullspace(nilpotent), StructuralError);
    }
}

TEST_CASE("limit_check_horizon follows the slowest stable mode") {
    Spectrum spec;
    spec.scale = 1.0;
    spec.eigenvalues = {Complex(0.0, 0.0), Complex(-0.5, 0.0), Complex(-4.0, 0.0)};
    CHECK(limit_check_horizon(spec) == Approx(100.0));

    spec.eigenvalues = {Complex(-1e-6, 0.0)};
    CHECK(limit_check_horizon(spec) == Approx(1e4));  // capped

    spec.eigenvalues = {Complex(0.0, 0.0)};
    CHECK(limit_check_horizon(spec) == Approx(1.0));  // nothing decays
}
