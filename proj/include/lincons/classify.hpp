#pragma once

#include <string>
#include <vector>

#include "lincons/blocks.hpp"
#include "lincons/linalg.hpp"

namespace lincons {

/// The system matrix of x' = Ax for n agents with m states each, viewed as an
/// n-by-n grid of m-by-m blocks A_ij.
struct SystemMatrix {
    Index n = 0;  ///< agent count, >= 2
    Index m = 0;  ///< per-agent state dimension, >= 1
    Matrix A;

    SystemMatrix() = default;

    SystemMatrix(Index n_, Index m_, Matrix A_) : n(n_), m(m_), A(std::move(A_)) { validate(); }

    [[nodiscard]] Index order() const { return n * m; }

    [[nodiscard]] Eigen::Block<const Matrix> block(Index i, Index j) const {
        return block_of(A, m, i, j);
    }

    void validate() const {
        if (n < 2) throw InputError("SystemMatrix: at least 2 agents required");
        if (m < 1) throw InputError("SystemMatrix: per-agent dimension must be >= 1");
        if (A.rows() != n * m || A.cols() != n * m)
            throw InputError("SystemMatrix: matrix order " + std::to_string(A.rows()) + "x" +
                             std::to_string(A.cols()) + " does not match n*m = " +
                             std::to_string(n * m));
        require_finite(A, "SystemMatrix");
    }
};

/// Split A = diag(C_11..C_nn) + D where every block row of D sums to zero.
/// The constraint forces C_ii to be the i-th block row sum of A.
struct CDDecomposition {
    Index n = 0, m = 0;
    std::vector<Matrix> C;  ///< n diagonal blocks, each m-by-m
    Matrix D;               ///< mn-by-mn coupling part

    /// [C_11; C_22; ...; C_nn] stacked into an (mn)-by-m matrix.
    [[nodiscard]] Matrix stacked_c() const {
        Matrix S(n * m, m);
        for (Index i = 0; i < n; ++i) S.block(i * m, 0, m, m) = C[static_cast<std::size_t>(i)];
        return S;
    }

    /// blockdiag(C) + D; reproduces the source matrix exactly.
    [[nodiscard]] Matrix reassemble() const {
        Matrix A = D;
        for (Index i = 0; i < n; ++i)
            block_of(A, m, i, i) += C[static_cast<std::size_t>(i)];
        return A;
    }
};

inline CDDecomposition decompose_cd(const SystemMatrix& sys) {
    CDDecomposition cd;
    cd.n = sys.n;
    cd.m = sys.m;
    cd.C.reserve(static_cast<std::size_t>(sys.n));
    cd.D = sys.A;
    for (Index i = 0; i < sys.n; ++i) {
        Matrix row_sum = Matrix::Zero(sys.m, sys.m);
        for (Index j = 0; j < sys.n; ++j) row_sum += sys.block(i, j);
        cd.C.push_back(row_sum);
        block_of(cd.D, sys.m, i, i) -= row_sum;
    }
    return cd;
}

/// True iff every null-space basis vector has all n of its m-blocks equal
/// (within convergence_abs; basis vectors are unit norm). Since agreement
/// states form a subspace, this characterizes N(A) being contained in it.
/// Vacuously true for invertible A.
inline bool kernel_is_agreement(const SystemMatrix& sys, const TolerancePolicy& tol = {}) {
    const Matrix basis = null_space_basis(sys.A, tol);
    for (Index c = 0; c < basis.cols(); ++c)
        if (!is_agreement_vector(basis.col(c), sys.n, sys.m, tol.convergence_abs)) return false;
    return true;
}

enum class Solvability { Yes, No, Indeterminate };

inline const char* to_string(Solvability s) {
    switch (s) {
        case Solvability::Yes: return "yes";
        case Solvability::No: return "no";
        case Solvability::Indeterminate: return "indeterminate";
    }
    return "?";
}

/// Result of the consensus-solvability decision, carrying the evidence from
/// both independent criteria:
///  - spectral_rank_criterion: rank(A) = rank(A^2), no unstable eigenvalues,
///    and the kernel consists of agreement states only;
///  - nullity_chain_criterion: dim N(A) = dim N(A^2) = dim N([C_11; ...; C_nn])
///    and no unstable eigenvalues.
/// The verdict is Indeterminate when the two disagree, which flags a
/// borderline spectrum rather than forcing a call.
struct ConsensusVerdict {
    Solvability solves = Solvability::Indeterminate;
    Spectrum spectrum;
    std::vector<EigenClass> eigen_classes;
    Index rank_A = 0, rank_A2 = 0;
    Index dimN_A = 0, dimN_A2 = 0, dimN_C = 0;
    bool kernel_agreement = false;
    bool spectral_rank_criterion = false;
    bool nullity_chain_criterion = false;
    std::vector<std::string> reasons;
};

inline ConsensusVerdict classify_consensus(const SystemMatrix& sys, const TolerancePolicy& tol = {}) {
    tol.validate();
    sys.validate();
    ConsensusVerdict v;
    v.spectrum = eigenvalues(sys.A);
    v.eigen_classes = v.spectrum.classes(tol);

    const bool modes_ok = v.spectrum.all_zero_or_stable(tol);
    if (modes_ok) {
        v.reasons.emplace_back("every eigenvalue is zero or has negative real part");
    } else {
        for (std::size_t i = 0; i < v.eigen_classes.size(); ++i) {
            if (v.eigen_classes[i] == EigenClass::Unstable) {
                const Complex lambda = v.spectrum.eigenvalues[i];
                v.reasons.push_back("unstable eigenvalue " + std::to_string(lambda.real()) +
                                    (lambda.imag() >= 0 ? "+" : "") + std::to_string(lambda.imag()) +
                                    "i");
                break;
            }
        }
    }

    const Index order = sys.order();
    v.rank_A = numeric_rank(sys.A, tol);
    v.rank_A2 = numeric_rank(Matrix(sys.A * sys.A), tol);
    v.dimN_A = order - v.rank_A;
    v.dimN_A2 = order - v.rank_A2;

    const CDDecomposition cd = decompose_cd(sys);
    v.dimN_C = sys.m - numeric_rank(cd.stacked_c(), tol);

    const bool rank_chain = v.rank_A == v.rank_A2;
    v.reasons.push_back(rank_chain
                            ? "rank(A) = rank(A^2) = " + std::to_string(v.rank_A)
                            : "rank chain broken: rank(A) = " + std::to_string(v.rank_A) +
                                  ", rank(A^2) = " + std::to_string(v.rank_A2));

    v.kernel_agreement = kernel_is_agreement(sys, tol);
    v.reasons.emplace_back(v.kernel_agreement
                               ? "null space consists of agreement states"
                               : "null space contains a non-agreement vector");

    const bool nullity_chain = v.dimN_A == v.dimN_A2 && v.dimN_A == v.dimN_C;
    v.reasons.push_back(nullity_chain
                            ? "dim N(A) = dim N(A^2) = dim N(stacked C) = " + std::to_string(v.dimN_A)
                            : "nullity chain broken: dim N(A) = " + std::to_string(v.dimN_A) +
                                  ", dim N(A^2) = " + std::to_string(v.dimN_A2) +
                                  ", dim N(stacked C) = " + std::to_string(v.dimN_C));

    v.spectral_rank_criterion = modes_ok && rank_chain && v.kernel_agreement;
    v.nullity_chain_criterion = modes_ok && nullity_chain;

    if (v.spectral_rank_criterion == v.nullity_chain_criterion) {
        v.solves = v.spectral_rank_criterion ? Solvability::Yes : Solvability::No;
    } else {
        v.solves = Solvability::Indeterminate;
        v.reasons.emplace_back(
            "criteria disagree (borderline spectrum): spectral/rank route says " +
            std::string(v.spectral_rank_criterion ? "yes" : "no") + ", nullity route says " +
            std::string(v.nullity_chain_criterion ? "yes" : "no"));
    }
    return v;
}

}  // namespace lincons
