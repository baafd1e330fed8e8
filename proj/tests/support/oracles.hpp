#pragma once

#include <cmath>

#include "lincons/linalg.hpp"

// Test-only oracles, deliberately independent of the library's SVD/eigen routes.
namespace testsupport {

// Rank by Gaussian elimination with partial pivoting.
inline lincons::Index elimination_rank(lincons::Matrix M) {
    using lincons::Index;
    const double threshold = 1e-10 * std::max(1.0, M.cwiseAbs().maxCoeff()) *
                             static_cast<double>(std::max(M.rows(), M.cols()));
    Index rank = 0;
    for (Index col = 0; col < M.cols() && rank < M.rows(); ++col) {
        Index pivot = -1;
        double best = threshold;
        for (Index row = rank; row < M.rows(); ++row) {
            if (std::abs(M(row, col)) > best) {
                best = std::abs(M(row, col));
                pivot = row;
            }
        }
        if (pivot < 0) continue;
        M.row(pivot).swap(M.row(rank));
        for (Index row = rank + 1; row < M.rows(); ++row)
            M.row(row) -= (M(row, col) / M(rank, col)) * M.row(rank);
        ++rank;
    }
    return rank;
}

// Orthogonal projector onto the column span, via normal equations on an
// elimination-selected independent column subset.
inline lincons::Matrix span_projector(const lincons::Matrix& columns) {
    if (columns.cols() == 0) return lincons::Matrix::Zero(columns.rows(), columns.rows());
    return columns * (columns.transpose() * columns).ldlt().solve(columns.transpose());
}

// True when the two matrices have the same column span (both ways).
inline bool same_span(const lincons::Matrix& X, const lincons::Matrix& Y, double tol = 1e-9) {
    if (X.rows() != Y.rows()) return false;
    const lincons::Matrix px = span_projector(X);
    const lincons::Matrix py = span_projector(Y);
    return (px - py).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace testsupport
