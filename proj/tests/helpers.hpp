#pragma once

#include "psvd/linops.hpp"
#include "psvd/smallsvd.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

// Shared test utilities. Reference decompositions use Eigen's own solvers
// (two-sided Jacobi SVD, tridiagonal-QR eigensolver), which share no code
// with the library under test.
namespace testutil {

using psvd::Index;
using psvd::Matrix;
using psvd::Vector;

inline psvd::SvdResult reference_svd(const Matrix& a) {
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    psvd::SvdResult out;
    out.u = svd.matrixU();
    out.s = svd.singularValues();
    out.v = svd.matrixV();
    return out;
}

/// Eigenvalues descending with matching eigenvector columns.
inline psvd::EigResult reference_eig(const Matrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    const Index n = s.rows();
    psvd::EigResult out;
    out.values = Vector(n);
    out.vectors = Matrix(n, n);
    for (Index j = 0; j < n; ++j) {
        out.values[j] = es.eigenvalues()[n - 1 - j];
        out.vectors.col(j) = es.eigenvectors().col(n - 1 - j);
    }
    return out;
}

inline double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

/// Angle between two one-dimensional directions, sign-insensitive.
inline double vector_angle(const Vector& a, const Vector& b) {
    const double denom = a.norm() * b.norm();
    if (denom == 0.0) return 1.5707963267948966;
    const double c = std::min(std::abs(a.dot(b)) / denom, 1.0);
    return std::acos(c);
}

/// Largest principal angle between the spans of two orthonormal blocks of
/// equal width (cosines are the singular values of qa^T qb).
inline double subspace_angle(const Matrix& qa, const Matrix& qb) {
    Eigen::JacobiSVD<Matrix> svd(qa.transpose() * qb);
    const double c = std::clamp(svd.singularValues().minCoeff(), -1.0, 1.0);
    return std::acos(c);
}

/// Random matrix with a prescribed spectrum plus its planted factors.
struct Planted {
    Matrix a;
    Matrix u;  // rows x r
    Vector s;  // r, descending
    Matrix v;  // cols x r
};

inline Planted planted_matrix(Index rows, Index cols, const Vector& spectrum, psvd::Rng& rng) {
    const Index r = spectrum.size();
    Planted p;
    p.u = psvd::orthonormalize_block(rng.normal_matrix(rows, r), rng).q;
    p.v = psvd::orthonormalize_block(rng.normal_matrix(cols, r), rng).q;
    p.s = spectrum;
    p.a = p.u * spectrum.asDiagonal() * p.v.transpose();
    return p;
}

inline Matrix diag_matrix(std::initializer_list<double> entries) {
    const Index n = static_cast<Index>(entries.size());
    Matrix d = Matrix::Zero(n, n);
    Index i = 0;
    for (double e : entries) d(i, i) = e, ++i;
    return d;
}

}  // namespace testutil
