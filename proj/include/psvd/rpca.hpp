#pragma once

#include "psvd/blws.hpp"

#include <optional>
#include <vector>

namespace psvd {

/// Scalar shrinkage: sign(x) * max(|x| - tau, 0). tau must be non-negative.
double soft_threshold(double x, double tau);

/// Elementwise shrinkage of a matrix.
Matrix soft_threshold(const Matrix& x, double tau);

/// Which partial-SVD engine the singular value thresholding operator uses.
enum class SvtBackend { threshold, blws };

struct SvtOptions {
    SvtBackend backend = SvtBackend::threshold;
    Index rank_guess = 10;  ///< starting rank for the blws backend (adapts upward)
    double tol = 1e-9;      ///< convergence tolerance handed to the backend
    std::uint64_t seed = 42;
};

struct SvtResult {
    Matrix x;       ///< the shrunk matrix, sum of (sigma - tau) u v^T over sigma > tau
    Index rank = 0; ///< number of singular values above tau
    std::uint64_t matvec_count = 0;
    std::optional<WarmState> warm;  ///< blws backend only: subspace for the next call
};

/// Singular value thresholding: shrink every singular value of `a` by `tau`
/// (strictly positive), dropping those at or below it. Only the
/// above-threshold triplets are ever computed. The blws backend starts from
/// `rank_guess` (or the warm state's width) and doubles its request until a
/// value at or below tau shows up, so it never misses tail values; the
/// threshold backend delegates the same guarantee to the threshold-driven
/// solver and returns any incoming warm state unchanged.
SvtResult svt(const Matrix& a, double tau, const SvtOptions& opts = {},
              const std::optional<WarmState>& warm = {});

struct RpcaOptions {
    double lambda = 0.0;  ///< sparsity weight; 0 picks 1/sqrt(max(rows, cols))
    double mu0 = 0.0;     ///< initial penalty; 0 picks 1.25 / ||D||_2
    double rho = 1.5;     ///< penalty growth factor per iteration
    double tol = 1e-7;    ///< stop when ||D-L-E||_F / ||D||_F drops below this
    Index max_iter = 500;
    SvtBackend backend = SvtBackend::threshold;
    std::uint64_t seed = 42;
};

struct RpcaIterRecord {
    Index iter = 0;
    double rel_residual = 0.0;  ///< ||D-L-E||_F / ||D||_F after the updates
    Index rank = 0;             ///< rank of L
    Index sparsity = 0;         ///< nonzero count of E
    double threshold = 0.0;     ///< shrinkage level 1/mu used for L this iteration
    std::uint64_t matvecs = 0;  ///< cumulative operator products
};

struct RpcaResult {
    Matrix l, e;
    Index iterations = 0;
    bool converged = false;
    std::uint64_t matvec_count = 0;
    std::vector<RpcaIterRecord> history;
};

/// Robust principal component analysis by the inexact augmented Lagrange
/// multiplier method: splits D into a low-rank L and a sparse E by
/// alternating singular value thresholding (for L) and elementwise shrinkage
/// (for E) against a growing penalty. Non-convergence within max_iter flags
/// the result instead of throwing.
RpcaResult rpca_ialm(const Matrix& d, const RpcaOptions& opts = {});

}  // namespace psvd
