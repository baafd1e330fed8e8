#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "lincons/errors.hpp"

namespace lincons {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using Complex = std::complex<double>;

/// Tolerances that govern every rank, spectrum and limit decision in the toolkit.
///
/// The rank cutoff is applied as rank_rel * sigma_max * max(rows, cols), i.e. a
/// relative singular-value threshold scaled by the matrix size.
struct TolerancePolicy {
    double rank_rel = 1e-10;        ///< relative singular-value cutoff for rank decisions
    double eig_zero_rel = 1e-9;     ///< band (relative to sigma_max) in which an eigenvalue counts as zero
    double convergence_abs = 1e-6;  ///< absolute tolerance for limit and trajectory checks

    void validate() const {
        if (!(rank_rel > 0.0) || !(eig_zero_rel > 0.0) || !(convergence_abs > 0.0))
            throw InputError("TolerancePolicy: all tolerances must be strictly positive");
    }
};

enum class EigenClass { Zero, Stable, Unstable };

inline const char* to_string(EigenClass c) {
    switch (c) {
        case EigenClass::Zero: return "zero";
        case EigenClass::Stable: return "stable";
        case EigenClass::Unstable: return "unstable";
    }
    return "?";
}

inline void require_finite(const Matrix& M, const char* where) {
    if (!M.allFinite())
        throw InputError(std::string(where) + ": matrix has non-finite entries");
}

inline void require_square(const Matrix& M, const char* where) {
    if (M.rows() != M.cols())
        throw InputError(std::string(where) + ": matrix must be square");
}

/// Largest absolute entry; 0 for empty matrices.
inline double max_abs(const Matrix& M) {
    return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
}

/// Entrywise equality relative to the max-norm of the operands, with an
/// absolute floor of convergence_abs.
inline bool nearly_equal(const Matrix& X, const Matrix& Y, const TolerancePolicy& tol = {}) {
    if (X.rows() != Y.rows() || X.cols() != Y.cols()) return false;
    const double scale = std::max({1.0, max_abs(X), max_abs(Y)});
    return max_abs(X - Y) <= tol.convergence_abs * scale;
}

/// X == 0 under the same policy, measured against a caller-supplied reference scale.
inline bool nearly_zero(const Matrix& X, double reference_scale, const TolerancePolicy& tol = {}) {
    const double scale = std::max(1.0, reference_scale);
    return max_abs(X) <= tol.convergence_abs * scale;
}

namespace detail {

inline Eigen::JacobiSVD<Matrix> full_svd(const Matrix& M) {
    return Eigen::JacobiSVD<Matrix>(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
}

inline double sigma_max(const Matrix& M) {
    if (M.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(M);
    return svd.singularValues().size() == 0 ? 0.0 : svd.singularValues()(0);
}

inline Index rank_from_singular_values(const Eigen::VectorXd& sv, Index rows, Index cols,
                                       const TolerancePolicy& tol) {
    if (sv.size() == 0) return 0;
    const double cutoff = tol.rank_rel * sv(0) * static_cast<double>(std::max(rows, cols));
    Index r = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++r;
    return r;
}

}  // namespace detail

/// Number of singular values above the relative cutoff. The zero matrix has rank 0.
inline Index numeric_rank(const Matrix& M, const TolerancePolicy& tol = {}) {
    tol.validate();
    require_finite(M, "numeric_rank");
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(M);
    return detail::rank_from_singular_values(svd.singularValues(), M.rows(), M.cols(), tol);
}

/// Columns form an orthonormal basis of N(M). cols(M) - rank columns in total;
/// empty for full-column-rank input.
inline Matrix null_space_basis(const Matrix& M, const TolerancePolicy& tol = {}) {
    tol.validate();
    require_finite(M, "null_space_basis");
    auto svd = detail::full_svd(M);
    const Index r = detail::rank_from_singular_values(svd.singularValues(), M.rows(), M.cols(), tol);
    return svd.matrixV().rightCols(M.cols() - r);
}

/// Columns form an orthonormal basis of the range (column space) of M.
inline Matrix range_space_basis(const Matrix& M, const TolerancePolicy& tol = {}) {
    tol.validate();
    require_finite(M, "range_space_basis");
    auto svd = detail::full_svd(M);
    const Index r = detail::rank_from_singular_values(svd.singularValues(), M.rows(), M.cols(), tol);
    return svd.matrixU().leftCols(r);
}

/// Rows form an orthonormal basis of N(M^T), so rows * M == 0.
inline Matrix left_null_space_basis(const Matrix& M, const TolerancePolicy& tol = {}) {
    return null_space_basis(M.transpose(), tol).transpose();
}

/// Full complex spectrum of a real square matrix, sorted by ascending real
/// part with ties broken by ascending imaginary part. `scale` is the largest
/// singular value of the source matrix and anchors the relative zero band.
struct Spectrum {
    std::vector<Complex> eigenvalues;
    double scale = 0.0;

    [[nodiscard]] EigenClass classify(std::size_t i, const TolerancePolicy& tol = {}) const {
        const Complex lambda = eigenvalues.at(i);
        const double band = tol.eig_zero_rel * scale;
        if (std::abs(lambda) <= band) return EigenClass::Zero;
        if (lambda.real() < -band) return EigenClass::Stable;
        return EigenClass::Unstable;
    }

    [[nodiscard]] std::vector<EigenClass> classes(const TolerancePolicy& tol = {}) const {
        std::vector<EigenClass> out(eigenvalues.size());
        for (std::size_t i = 0; i < eigenvalues.size(); ++i) out[i] = classify(i, tol);
        return out;
    }

    [[nodiscard]] bool all_zero_or_stable(const TolerancePolicy& tol = {}) const {
        for (std::size_t i = 0; i < eigenvalues.size(); ++i)
            if (classify(i, tol) == EigenClass::Unstable) return false;
        return true;
    }

    /// Smallest |Re(lambda)| among stable eigenvalues; 0 when none are stable.
    [[nodiscard]] double slowest_stable_decay(const TolerancePolicy& tol = {}) const {
        double slowest = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < eigenvalues.size(); ++i)
            if (classify(i, tol) == EigenClass::Stable)
                slowest = std::min(slowest, -eigenvalues[i].real());
        return std::isfinite(slowest) ? slowest : 0.0;
    }
};

namespace detail {

inline bool spectrum_order(const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

/// Pair off eigenvalues with nonzero imaginary part and replace each pair by
/// exact conjugates, so the output satisfies the conjugate-pair invariant even
/// if the solver returned slightly asymmetric values.
inline void enforce_conjugate_pairs(std::vector<Complex>& ev) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        if (ev[i].imag() > 0) pos.push_back(i);
        else if (ev[i].imag() < 0) neg.push_back(i);
    }
    if (pos.size() != neg.size()) return;  // leave solver output untouched
    std::sort(pos.begin(), pos.end(), [&](auto a, auto b) { return spectrum_order(ev[a], ev[b]); });
    std::sort(neg.begin(), neg.end(),
              [&](auto a, auto b) { return spectrum_order(std::conj(ev[a]), std::conj(ev[b])); });
    for (std::size_t k = 0; k < pos.size(); ++k) {
        const Complex p = ev[pos[k]], q = ev[neg[k]];
        const double re = 0.5 * (p.real() + q.real());
        const double im = 0.5 * (p.imag() - q.imag());
        ev[pos[k]] = {re, im};
        ev[neg[k]] = {re, -im};
    }
}

}  // namespace detail

inline Spectrum eigenvalues(const Matrix& M) {
    require_square(M, "eigenvalues");
    require_finite(M, "eigenvalues");
    Eigen::EigenSolver<Matrix> es(M, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw ComputationError("eigenvalues: solver failed to converge for order " +
                               std::to_string(M.rows()));
    Spectrum spec;
    spec.eigenvalues.reserve(static_cast<std::size_t>(M.rows()));
    for (Index i = 0; i < M.rows(); ++i) spec.eigenvalues.push_back(es.eigenvalues()(i));
    detail::enforce_conjugate_pairs(spec.eigenvalues);
    std::sort(spec.eigenvalues.begin(), spec.eigenvalues.end(), detail::spectrum_order);
    spec.scale = detail::sigma_max(M);
    return spec;
}

/// e^M by scaling-and-squaring with a Pade approximant.
inline Matrix matrix_exponential(const Matrix& M) {
    require_square(M, "matrix_exponential");
    require_finite(M, "matrix_exponential");
    Matrix R = M.exp();
    if (!R.allFinite())
        throw ComputationError("matrix_exponential: overflow (matrix norm too large)");
    return R;
}

/// The projector P0 onto N(A) along R(A): P0^2 = P0, A P0 = P0 A = 0,
/// range(P0) = N(A), N(P0) = R(A). Exists iff rank(A) = rank(A^2); equals
/// lim_{t->inf} e^{At} when A additionally has no unstable eigenvalues.
inline Matrix spectral_projector_onto_nullspace(const Matrix& A, const TolerancePolicy& tol = {}) {
    tol.validate();
    require_square(A, "spectral_projector_onto_nullspace");
    require_finite(A, "spectral_projector_onto_nullspace");
    const Index order = A.rows();
    const Index rank_a = numeric_rank(A, tol);
    const Index rank_a2 = numeric_rank(Matrix(A * A), tol);
    if (rank_a != rank_a2)
        throw StructuralError("spectral_projector_onto_nullspace: no direct sum, rank(A) = " +
                              std::to_string(rank_a) + " but rank(A^2) = " + std::to_string(rank_a2));
    const Index k = order - rank_a;
    if (k == 0) return Matrix::Zero(order, order);
    if (rank_a == 0) return Matrix::Identity(order, order);

    Matrix S(order, order);
    S << null_space_basis(A, tol), range_space_basis(A, tol);
    Eigen::FullPivLU<Matrix> lu(S);
    if (!lu.isInvertible())
        throw InconsistencyError(
            "spectral_projector_onto_nullspace: combined null/range basis is singular");
    // Keep the N(A)-coordinates, drop the R(A)-coordinates.
    return S.leftCols(k) * lu.inverse().topRows(k);
}

/// Horizon for finite-t cross-checks of algebraic limits: 50 time constants of
/// the slowest decaying mode, capped at 1e4. Falls back to 1 when nothing decays.
inline double limit_check_horizon(const Spectrum& spec, const TolerancePolicy& tol = {}) {
    const double slowest = spec.slowest_stable_decay(tol);
    if (slowest <= 0.0) return 1.0;
    return std::min(50.0 / slowest, 1e4);
}

}  // namespace lincons
