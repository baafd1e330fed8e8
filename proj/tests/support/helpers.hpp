#pragma once

#include <random>

#include "lincons/lincons.hpp"

namespace testsupport {

using lincons::Index;
using lincons::Matrix;
using lincons::Vector;

// 2-agent system with planar states whose kernel is spanned by the agreement
// vectors (1,0,1,0) and (0,1,0,1); eigenvalues 0, 0, -1 +/- i.
inline Matrix two_agent_planar_matrix() {
    Matrix A(4, 4);
    A << -1, 0, 1, 0,
          1, 0, -1, 0,
          0, 1, 0, -1,
          0, 1, 0, -1;
    return A;
}

inline lincons::SystemMatrix two_agent_planar_system() {
    return {2, 2, two_agent_planar_matrix()};
}

// Its t -> infinity propagator.
inline Matrix two_agent_planar_limit() {
    Matrix B(4, 4);
    B << 0.5, 0.5, 0.5, -0.5,
         0.5, 0.5, -0.5, 0.5,
         0.5, 0.5, 0.5, -0.5,
         0.5, 0.5, -0.5, 0.5;
    return B;
}

inline Matrix two_agent_planar_functional() {
    Matrix E(2, 4);
    E << 0.5, 0.5, 0.5, -0.5,
         0.5, 0.5, -0.5, 0.5;
    return E;
}

// Hand-picked change of basis taking the system above to canonical form.
inline Matrix canonical_basis_t1() {
    Matrix T1(4, 4);
    T1 << 2, 0, 1, -1,
          6, 4, -1, 1,
          2, 0, -1, -1,
          6, 4, -1, -1;
    return T1;
}

inline Matrix canonical_form_b() {
    Matrix B(4, 4);
    B << 0, 0, 0, 0,
         0, 0, 0, 0,
         0, 0, -1, -1,
         0, 0, 1, -1;
    return B;
}

// Average-form transform for n = 2, m = 2 and the system it produces.
inline Matrix average_transform_t2() {
    Matrix T2(4, 4);
    T2 << 1, 0, 1, 0,
          0, 1, 0, 1,
         -1, 0, 1, 0,
          0, -1, 0, 1;
    return T2;
}

inline Matrix average_system_c() {
    Matrix C(4, 4);
    C << -0.5, -0.5, 0.5, 0.5,
          0.5, -0.5, -0.5, 0.5,
          0.5, 0.5, -0.5, -0.5,
         -0.5, 0.5, 0.5, -0.5;
    return C;
}

inline Matrix combined_transform_t() {
    Matrix T(4, 4);
    T << 1, 1, 3, -1,
         7, 3, 5, 5,
         3, 1, 1, -1,
         7, 5, 5, 3;
    return T;
}

inline double max_abs_diff(const Matrix& X, const Matrix& Y) {
    return (X - Y).cwiseAbs().maxCoeff();
}

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix M(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) M(i, j) = normal(rng);
    return M;
}

inline Vector random_vector(Index size, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(size);
    for (Index i = 0; i < size; ++i) v(i) = normal(rng);
    return v;
}

}  // namespace testsupport
