#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>

#include "lincons/classify.hpp"
#include "lincons/consensus_function.hpp"
#include "lincons/report.hpp"

namespace lincons {

/// Canonical form J = blockdiag(0_r, M) with 1 <= r and M strictly stable.
struct CanonicalForm {
    Index r = 0;  ///< null dimension
    Matrix M;     ///< strictly stable block of order (order - r)

    [[nodiscard]] Index order() const { return r + M.rows(); }

    [[nodiscard]] Matrix assemble() const {
        Matrix J = Matrix::Zero(order(), order());
        J.bottomRightCorner(M.rows(), M.cols()) = M;
        return J;
    }
};

inline CanonicalForm make_canonical_form(Index r, Matrix M, const TolerancePolicy& tol = {}) {
    tol.validate();
    if (r < 1) throw InputError("CanonicalForm: r >= 1 required (no zero block would remain)");
    require_square(M, "CanonicalForm");
    require_finite(M, "CanonicalForm");
    const Spectrum spec = eigenvalues(M);
    for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i)
        if (spec.classify(i, tol) != EigenClass::Stable)
            throw InputError("CanonicalForm: M must have all eigenvalues in the open left half-plane");
    return CanonicalForm{r, std::move(M)};
}

/// Block-structured similarity transform: block rows 2..n sum to zero, the
/// first block-row sum T_U and the trailing principal block T_D are invertible.
/// Under the zero-row-sum structure |det T| = |det T_U| * |det T_D|, so T
/// itself is invertible exactly when both factors are.
struct StructuredTransform {
    Index n = 0, m = 0;
    Matrix T;

    [[nodiscard]] Matrix t_upper() const {
        Matrix sum = Matrix::Zero(m, m);
        for (Index j = 0; j < n; ++j) sum += block_of(T, m, 0, j);
        return sum;
    }

    [[nodiscard]] Matrix t_lower() const { return T.bottomRightCorner((n - 1) * m, (n - 1) * m); }
};

/// Clause-by-clause structural check of a candidate transform. With `average`
/// set, additionally requires a constant invertible first block row.
inline CheckReport verify_transform(const Matrix& T, Index n, Index m, bool average,
                                    const TolerancePolicy& tol = {}) {
    tol.validate();
    require_finite(T, "verify_transform");
    if (T.rows() != n * m || T.cols() != n * m)
        throw InputError("verify_transform: matrix order does not match n*m");

    CheckReport report;
    const double scale = max_abs(T);
    bool rows_ok = true;
    std::string row_detail;
    for (Index i = 1; i < n; ++i) {
        Matrix sum = Matrix::Zero(m, m);
        for (Index j = 0; j < n; ++j) sum += block_of(T, m, i, j);
        if (!nearly_zero(sum, scale, tol)) {
            rows_ok = false;
            row_detail = "block row " + std::to_string(i + 1) + " sums to a nonzero block";
            break;
        }
    }
    report.add("block rows 2..n sum to zero", rows_ok, row_detail);

    StructuredTransform st{n, m, T};
    report.add("T_U invertible", numeric_rank(st.t_upper(), tol) == m);
    report.add("T_D invertible", numeric_rank(st.t_lower(), tol) == (n - 1) * m);

    if (average) {
        const Matrix first = block_of(T, m, 0, 0);
        bool constant = true;
        for (Index j = 1; j < n; ++j)
            if (!nearly_equal(block_of(T, m, 0, j), first, tol)) {
                constant = false;
                break;
            }
        report.add("first block row constant", constant);
        report.add("T_11 invertible", numeric_rank(first, tol) == m);
    }
    return report;
}

namespace detail {

inline Matrix random_gaussian(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix M(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) M(i, j) = normal(rng);
    return M;
}

inline double condition_number(const Matrix& M) {
    Eigen::JacobiSVD<Matrix> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(sv.size() - 1) <= 0.0)
        return std::numeric_limits<double>::infinity();
    return sv(0) / sv(sv.size() - 1);
}

inline Matrix sample_well_conditioned(Index order, std::mt19937_64& rng, double cond_limit,
                                      const char* where) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        Matrix M = random_gaussian(order, order, rng);
        if (condition_number(M) < cond_limit) return M;
    }
    throw GenerationError(std::string(where) + ": resampling budget exhausted");
}

inline Matrix random_orthogonal(Index order, std::mt19937_64& rng) {
    Eigen::HouseholderQR<Matrix> qr(random_gaussian(order, order, rng));
    return qr.householderQ() * Matrix::Identity(order, order);
}

}  // namespace detail

/// Random strictly stable matrix -(Q^T Q + 0.1 I), conjugated by a random
/// orthogonal matrix. Deterministic in the seed.
inline Matrix random_stable_matrix(Index order, std::uint64_t seed) {
    if (order < 1) throw InputError("random_stable_matrix: order must be >= 1");
    std::mt19937_64 rng(seed);
    Matrix Q = detail::random_gaussian(order, order, rng);
    Matrix M = -(Q.transpose() * Q + 0.1 * Matrix::Identity(order, order));
    Matrix V = detail::random_orthogonal(order, rng);
    return V.transpose() * M * V;
}

/// Seeded random transform satisfying the structural clauses; with `average`
/// the whole first block row is one invertible block.
inline StructuredTransform construct_transform(Index n, Index m, std::uint64_t seed,
                                               bool average = false) {
    if (n < 2 || m < 1) throw InputError("construct_transform: need n >= 2 and m >= 1");
    std::mt19937_64 rng(seed);
    constexpr double cond_limit = 1e6;

    const Index mn = n * m;
    Matrix T = Matrix::Zero(mn, mn);
    T.bottomRightCorner((n - 1) * m, (n - 1) * m) =
        detail::sample_well_conditioned((n - 1) * m, rng, cond_limit, "construct_transform (T_D)");

    // Row-sum constraint fixes the first block column of rows 2..n.
    for (Index i = 1; i < n; ++i) {
        Matrix sum = Matrix::Zero(m, m);
        for (Index j = 1; j < n; ++j) sum += block_of(T, m, i, j);
        block_of(T, m, i, 0) = -sum;
    }

    if (average) {
        const Matrix first =
            detail::sample_well_conditioned(m, rng, cond_limit, "construct_transform (T_11)");
        for (Index j = 0; j < n; ++j) block_of(T, m, 0, j) = first;
    } else {
        for (int attempt = 0;; ++attempt) {
            if (attempt >= 100)
                throw GenerationError("construct_transform (T_U): resampling budget exhausted");
            for (Index j = 0; j < n; ++j) block_of(T, m, 0, j) = detail::random_gaussian(m, m, rng);
            StructuredTransform candidate{n, m, T};
            if (detail::condition_number(candidate.t_upper()) < cond_limit) break;
        }
    }
    return StructuredTransform{n, m, std::move(T)};
}

/// A = T^{-1} J T. The result solves a consensus problem by construction; with
/// an average-form T and r = m it solves the average consensus problem.
inline SystemMatrix synthesize_system(const StructuredTransform& transform, const CanonicalForm& form,
                                      const TolerancePolicy& tol = {}) {
    tol.validate();
    if (form.r < 1) throw InputError("synthesize_system: canonical form must have r >= 1");
    if (form.r > transform.m)
        throw InputError("synthesize_system: r = " + std::to_string(form.r) +
                         " exceeds the per-agent dimension m = " + std::to_string(transform.m));
    if (form.order() != transform.n * transform.m)
        throw InputError("synthesize_system: canonical form order does not match the transform");

    const double cond = detail::condition_number(transform.T);
    if (!(cond < 1e8))
        throw ConditioningError("synthesize_system: transform condition number " +
                                std::to_string(cond) + " exceeds 1e8");
    Eigen::FullPivLU<Matrix> lu(transform.T);
    Matrix A = lu.solve(form.assemble() * transform.T);
    return SystemMatrix(transform.n, transform.m, std::move(A));
}

/// Change of basis T1 = [null basis | range basis] taking a consensus system
/// to its canonical form: T1^{-1} A T1 = blockdiag(0_r, M) with M strictly
/// stable, because A maps its range onto itself.
inline std::pair<Matrix, CanonicalForm> bring_to_canonical(const SystemMatrix& sys,
                                                           const TolerancePolicy& tol = {}) {
    detail::require_consensus_verdict(sys, tol, "bring_to_canonical");
    const Matrix kernel = null_space_basis(sys.A, tol);
    const Index r = kernel.cols();
    if (r == 0)
        throw StructuralError(
            "bring_to_canonical: A is invertible, so the canonical form is trivial (M = A itself)");

    const Index order = sys.order();
    Matrix T1(order, order);
    T1 << kernel, range_space_basis(sys.A, tol);
    Eigen::FullPivLU<Matrix> lu(T1);
    if (!lu.isInvertible())
        throw InconsistencyError("bring_to_canonical: null/range column basis is singular");

    Matrix B = lu.solve(sys.A * T1);
    CanonicalForm form;
    form.r = r;
    form.M = B.bottomRightCorner(order - r, order - r);
    const Spectrum spec = eigenvalues(form.M);
    for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i)
        if (spec.classify(i, tol) != EigenClass::Stable)
            throw InconsistencyError(
                "bring_to_canonical: trailing block is not strictly stable; the upstream "
                "classification looks wrong");
    return {std::move(T1), std::move(form)};
}

struct RetargetResult {
    Matrix T;             ///< combined transform T = T1 * T2
    SystemMatrix system;  ///< A' = T^{-1} A T, solves the average consensus problem
};

/// Compose the canonical change of basis with a random average-form transform
/// so that A' = T^{-1} A T solves the average consensus problem. Requires the
/// kernel dimension to equal m.
inline RetargetResult retarget_to_average(const SystemMatrix& sys, const TolerancePolicy& tol = {},
                                          std::uint64_t seed = 0) {
    ConsensusVerdict v = detail::require_consensus_verdict(sys, tol, "retarget_to_average");
    if (v.dimN_A != sys.m)
        throw StructuralError("retarget_to_average: requires dim N(A) = m, got " +
                              std::to_string(v.dimN_A));
    auto [T1, form] = bring_to_canonical(sys, tol);
    StructuredTransform T2 = construct_transform(sys.n, sys.m, seed, /*average=*/true);

    RetargetResult out;
    out.T = T1 * T2.T;
    Eigen::FullPivLU<Matrix> lu(out.T);
    if (!lu.isInvertible())
        throw ConditioningError("retarget_to_average: combined transform is singular");
    out.system = SystemMatrix(sys.n, sys.m, lu.solve(sys.A * out.T));
    return out;
}

/// Seeded random system that solves a consensus problem with kernel dimension
/// r, built as T^{-1} blockdiag(0_r, M) T from a structured transform.
inline SystemMatrix random_consensus_system(Index n, Index m, Index r, std::uint64_t seed,
                                            bool average = false) {
    if (r < 1 || r > m) throw InputError("random_consensus_system: need 1 <= r <= m");
    StructuredTransform T = construct_transform(n, m, seed, average);
    CanonicalForm form;
    form.r = r;
    form.M = random_stable_matrix(n * m - r, seed ^ 0x9e3779b97f4a7c15ull);
    return synthesize_system(T, form);
}

}  // namespace lincons
