#pragma once

#include "lincons/linalg.hpp"

namespace lincons {

/// The (i, j) m-by-m block of a block-partitioned matrix; block indices are 0-based.
inline Eigen::Block<const Matrix> block_of(const Matrix& M, Index m, Index i, Index j) {
    return M.block(i * m, j * m, m, m);
}

inline Eigen::Block<Matrix> block_of(Matrix& M, Index m, Index i, Index j) {
    return M.block(i * m, j * m, m, m);
}

/// The i-th m-block of a stacked vector.
inline Eigen::VectorBlock<const Vector> vector_block(const Vector& v, Index m, Index i) {
    return v.segment(i * m, m);
}

inline Matrix kron(const Matrix& A, const Matrix& B) {
    Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

/// [I_m; I_m; ...; I_m] with n copies — maps b to the agreement state with all
/// agent blocks equal to b.
inline Matrix stacked_identities(Index n, Index m) {
    Matrix S = Matrix::Zero(n * m, m);
    for (Index i = 0; i < n; ++i) S.block(i * m, 0, m, m) = Matrix::Identity(m, m);
    return S;
}

/// Orthogonal projector onto the agreement subspace {all agent blocks equal}.
inline Matrix agreement_projector(Index n, Index m) {
    return kron(Matrix::Constant(n, n, 1.0 / static_cast<double>(n)), Matrix::Identity(m, m));
}

/// Largest deviation (max norm) of the vector's agent blocks from their mean block.
inline double agreement_defect(const Vector& v, Index n, Index m) {
    Vector mean = Vector::Zero(m);
    for (Index i = 0; i < n; ++i) mean += vector_block(v, m, i);
    mean /= static_cast<double>(n);
    double defect = 0.0;
    for (Index i = 0; i < n; ++i)
        defect = std::max(defect, (vector_block(v, m, i) - mean).cwiseAbs().maxCoeff());
    return defect;
}

inline bool is_agreement_vector(const Vector& v, Index n, Index m, double abs_tol) {
    return agreement_defect(v, n, m) <= abs_tol;
}

}  // namespace lincons
