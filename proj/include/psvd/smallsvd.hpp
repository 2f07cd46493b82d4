#pragma once

#include "psvd/core.hpp"

#include <vector>

namespace psvd {

/// Thin SVD A = U * diag(S) * V^T with r = min(rows, cols) triplets and the
/// singular values sorted in descending order.
struct SvdResult {
    Matrix u;  ///< rows x r, orthonormal columns
    Vector s;  ///< r, descending, non-negative
    Matrix v;  ///< cols x r, orthonormal columns
};

/// Thrown when the Jacobi sweeps hit their cap; carries the best factorization
/// reached so the caller can inspect or accept it.
class svd_convergence_error : public convergence_error {
public:
    svd_convergence_error(const std::string& msg, SvdResult best)
        : convergence_error(msg), best_(std::move(best)) {}
    const SvdResult& best() const noexcept { return best_; }

private:
    SvdResult best_;
};

/// Thin SVD of a dense matrix by one-sided Jacobi rotations. Matrices much
/// taller than wide (rows > 2*cols) are first reduced by a thin Householder
/// QR; wide matrices are handled through the transpose. Sweeps stop when
/// every column pair is orthogonal to 1e-14 relative to the column norms;
/// more than 30 sweeps raises svd_convergence_error.
SvdResult svd_dense(const Matrix& a);

/// Same algorithm with an explicit sweep cap (exposed for testing the
/// failure path; svd_dense uses 30).
SvdResult svd_dense_capped(const Matrix& a, int max_sweeps);

/// SVD of the (K+1) x K lower-bidiagonal matrix with the K `alphas` on the
/// main diagonal and the K `betas` on the subdiagonal (betas[j] couples step
/// j to step j+1). The matrix is assembled densely; K stays small in this
/// toolkit so that is cheap.
SvdResult svd_bidiagonal(const std::vector<double>& alphas, const std::vector<double>& betas);

/// Eigen-decomposition S = Q * diag(values) * Q^T of a symmetric matrix,
/// values sorted descending. Classical two-sided cyclic Jacobi; input must
/// be symmetric to about 1e-8 relative, and is symmetrized exactly before
/// the sweeps.
struct EigResult {
    Vector values;   ///< descending (by value, signed)
    Matrix vectors;  ///< orthonormal, column j pairs with values[j]
};

EigResult eig_symmetric(const Matrix& s);

}  // namespace psvd
