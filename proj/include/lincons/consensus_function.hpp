#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lincons/classify.hpp"
#include "lincons/report.hpp"

namespace lincons {

/// Intermediate data of the left-null-space construction: the stacked rows F,
/// their m-by-m block partition F_1..F_n, and the invertible block sum T with
/// E = T^{-1} F.
struct LeftNullDerivation {
    Matrix left_null_rows;          ///< F, m-by-mn, rows span N(A^T)
    std::vector<Matrix> blocks;     ///< F_1..F_n
    Matrix block_sum;               ///< T = F_1 + ... + F_n
    Matrix block_sum_inverse;
};

/// The consensus function chi(x) = E x together with the limit matrix
/// B = lim e^{At}. When the kernel has full dimension m, every block row of B
/// equals E and the derivation record is available.
struct ConsensusFunctional {
    Index n = 0, m = 0;
    Matrix E;      ///< m-by-mn
    Matrix limit;  ///< mn-by-mn
    std::optional<LeftNullDerivation> derivation;

    /// Group decision value for the initial state x0.
    [[nodiscard]] Vector evaluate(const Vector& x0) const {
        if (x0.size() != E.cols())
            throw InputError("ConsensusFunctional: state has dimension " +
                             std::to_string(x0.size()) + ", expected " + std::to_string(E.cols()));
        return E * x0;
    }
};

/// Scalar-state consensus function chi(x) = sum(y_i x_i) / sum(y_i).
struct WeightedAverage {
    Vector weights;
    double normalizer = 0.0;

    [[nodiscard]] double evaluate(const Vector& x0) const {
        if (x0.size() != weights.size())
            throw InputError("WeightedAverage: state has dimension " + std::to_string(x0.size()) +
                             ", expected " + std::to_string(weights.size()));
        return weights.dot(x0) / normalizer;
    }
};

namespace detail {

inline ConsensusVerdict require_consensus_verdict(const SystemMatrix& sys,
                                                  const TolerancePolicy& tol, const char* where) {
    ConsensusVerdict v = classify_consensus(sys, tol);
    if (v.solves != Solvability::Yes)
        throw StructuralError(std::string(where) + ": system does not solve a consensus problem (" +
                              to_string(v.solves) + ")");
    return v;
}

}  // namespace detail

/// Consensus function from an explicit left-null basis: rows of
/// `left_null_rows` must be m linearly independent vectors annihilating A.
/// The result does not depend on the basis choice.
inline ConsensusFunctional consensus_function_method1(const SystemMatrix& sys,
                                                      const Matrix& left_null_rows,
                                                      const TolerancePolicy& tol = {}) {
    tol.validate();
    const Index mn = sys.order();
    if (left_null_rows.rows() != sys.m || left_null_rows.cols() != mn)
        throw InputError("consensus_function_method1: left-null basis must be m x mn");
    require_finite(left_null_rows, "consensus_function_method1");
    if (!nearly_zero(Matrix(left_null_rows * sys.A),
                     max_abs(left_null_rows) * std::max(1.0, max_abs(sys.A)), tol))
        throw InputError("consensus_function_method1: supplied rows do not annihilate A");
    if (numeric_rank(left_null_rows, tol) != sys.m)
        throw InputError("consensus_function_method1: supplied rows are not linearly independent");

    LeftNullDerivation d;
    d.left_null_rows = left_null_rows;
    Matrix block_sum = Matrix::Zero(sys.m, sys.m);
    for (Index i = 0; i < sys.n; ++i) {
        d.blocks.emplace_back(left_null_rows.middleCols(i * sys.m, sys.m));
        block_sum += d.blocks.back();
    }
    d.block_sum = block_sum;

    Eigen::FullPivLU<Matrix> lu(block_sum);
    if (!lu.isInvertible())
        throw InconsistencyError(
            "consensus_function_method1: block sum of the left-null basis is singular; "
            "the upstream classification looks wrong");
    d.block_sum_inverse = lu.inverse();

    ConsensusFunctional fn;
    fn.n = sys.n;
    fn.m = sys.m;
    fn.E = d.block_sum_inverse * left_null_rows;
    fn.limit.resize(mn, mn);
    for (Index i = 0; i < sys.n; ++i) fn.limit.middleRows(i * sys.m, sys.m) = fn.E;
    fn.derivation = std::move(d);
    return fn;
}

/// Closed-form consensus function for systems whose kernel has the full
/// dimension m (equivalently rank(A) = (n-1)m). Requires a Yes verdict.
inline ConsensusFunctional consensus_function_method1(const SystemMatrix& sys,
                                                      const TolerancePolicy& tol = {}) {
    detail::require_consensus_verdict(sys, tol, "consensus_function_method1");
    const Index expected_rank = (sys.n - 1) * sys.m;
    const Index rank = numeric_rank(sys.A, tol);
    if (rank != expected_rank)
        throw StructuralError("consensus_function_method1: inapplicable, rank(A) = " +
                              std::to_string(rank) + " but (n-1)m = " +
                              std::to_string(expected_rank) + "; use limit_expm instead");
    return consensus_function_method1(sys, left_null_space_basis(sys.A, tol), tol);
}

/// B = lim_{t->inf} e^{At}, computed algebraically as the spectral projector
/// onto N(A) and cross-checked against a finite-time matrix exponential.
inline Matrix limit_expm(const SystemMatrix& sys, const TolerancePolicy& tol = {}) {
    ConsensusVerdict v = detail::require_consensus_verdict(sys, tol, "limit_expm");
    Matrix projector = spectral_projector_onto_nullspace(sys.A, tol);
    const double horizon = limit_check_horizon(v.spectrum, tol);
    Matrix finite_t = matrix_exponential(Matrix(sys.A * horizon));
    if (!nearly_zero(Matrix(finite_t - projector), 1.0, tol))
        throw InconsistencyError("limit_expm: finite-time exponential at t = " +
                                 std::to_string(horizon) +
                                 " disagrees with the spectral projector");
    return projector;
}

/// Consensus functional for any admissible kernel dimension r <= m: E is the
/// first block row of the limit matrix (all block rows agree at the limit).
inline ConsensusFunctional consensus_functional_from_limit(const SystemMatrix& sys,
                                                           const TolerancePolicy& tol = {}) {
    ConsensusFunctional fn;
    fn.n = sys.n;
    fn.m = sys.m;
    fn.limit = limit_expm(sys, tol);
    fn.E = fn.limit.topRows(sys.m);
    // Block rows of the projector are provably equal at the limit; flag any
    // measured disparity above tolerance.
    for (Index i = 1; i < sys.n; ++i)
        if (!nearly_equal(fn.limit.middleRows(i * sys.m, sys.m), fn.E, tol))
            throw InconsistencyError(
                "consensus_functional_from_limit: limit matrix block rows differ");
    return fn;
}

/// Weighted-average consensus function for scalar agent states (m = 1):
/// weights are any nonzero left-null vector of A.
inline WeightedAverage consensus_function_scalar(const SystemMatrix& sys,
                                                 const TolerancePolicy& tol = {}) {
    tol.validate();
    if (sys.m != 1) throw InputError("consensus_function_scalar: requires m = 1");

    const Spectrum spec = eigenvalues(sys.A);
    if (!spec.all_zero_or_stable(tol))
        throw StructuralError(
            "consensus_function_scalar: violated condition: each eigenvalue must be 0 or have "
            "negative real part");
    const Vector row_sums = sys.A * Vector::Ones(sys.n);
    if (!nearly_zero(Matrix(row_sums), max_abs(sys.A), tol))
        throw StructuralError("consensus_function_scalar: violated condition: A*1 = 0");
    const Index rank = numeric_rank(sys.A, tol);
    const Index rank2 = numeric_rank(Matrix(sys.A * sys.A), tol);
    if (rank != sys.n - 1 || rank2 != rank)
        throw StructuralError(
            "consensus_function_scalar: violated condition: rank(A^2) = rank(A) = n-1 (got rank(A) = " +
            std::to_string(rank) + ", rank(A^2) = " + std::to_string(rank2) + ")");

    const Matrix left = left_null_space_basis(sys.A, tol);
    WeightedAverage w;
    w.weights = left.row(0).transpose();
    w.normalizer = w.weights.sum();
    if (std::abs(w.normalizer) <= tol.convergence_abs * w.weights.cwiseAbs().maxCoeff())
        throw InconsistencyError(
            "consensus_function_scalar: left-null weights sum to zero; the upstream "
            "classification looks wrong");
    return w;
}

/// Clause-by-clause test for (weighted-free) average consensus: rank chain at
/// m(n-1), both block-sum annihilation conditions, and an all zero-or-stable
/// spectrum containing zero. For m = 1 the clauses specialize to 1^T A = 0 and
/// A 1 = 0.
inline CheckReport check_average_consensus(const SystemMatrix& sys, const TolerancePolicy& tol = {}) {
    tol.validate();
    sys.validate();
    CheckReport report;
    const Index expected_rank = sys.m * (sys.n - 1);
    const Index rank = numeric_rank(sys.A, tol);
    const Index rank2 = numeric_rank(Matrix(sys.A * sys.A), tol);
    report.add("rank(A^2) = rank(A) = m(n-1)", rank == expected_rank && rank2 == expected_rank,
               "rank(A) = " + std::to_string(rank) + ", rank(A^2) = " + std::to_string(rank2) +
                   ", m(n-1) = " + std::to_string(expected_rank));

    const Matrix stack = stacked_identities(sys.n, sys.m);
    const bool left_ok = nearly_zero(Matrix(stack.transpose() * sys.A), max_abs(sys.A), tol);
    const bool right_ok = nearly_zero(Matrix(sys.A * stack), max_abs(sys.A), tol);
    if (sys.m == 1) {
        report.add("1^T A = 0", left_ok);
        report.add("A 1 = 0", right_ok);
    } else {
        report.add("[I,...,I] A = 0", left_ok);
        report.add("A [I,...,I]^T = 0", right_ok);
    }

    const Spectrum spec = eigenvalues(sys.A);
    const auto classes = spec.classes(tol);
    const bool modes_ok = spec.all_zero_or_stable(tol);
    const bool has_zero =
        std::any_of(classes.begin(), classes.end(), [](EigenClass c) { return c == EigenClass::Zero; });
    report.add("spectrum is a zero group plus stable eigenvalues", modes_ok && has_zero);
    return report;
}

inline Vector evaluate_chi(const ConsensusFunctional& fn, const Vector& x0) {
    return fn.evaluate(x0);
}

inline Vector evaluate_chi(const WeightedAverage& w, const Vector& x0) {
    Vector out(1);
    out(0) = w.evaluate(x0);
    return out;
}

}  // namespace lincons
