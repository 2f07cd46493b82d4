#pragma once

#include "psvd/partialsvd.hpp"

#include <optional>

namespace psvd {

/// Subspace carried between related solves: the block of right (or eigen-)
/// vectors from the previous call, fed back as the starting block of the
/// next. `generation` counts how many solves the state has passed through.
struct WarmState {
    Matrix block;
    Index rank_hint = 0;
    Index generation = 0;
};

struct BlwsOptions {
    Index steps = 3;         ///< block expansions per restart pass
    Index block_size = 0;    ///< starting block width; 0 means k, must be >= k
    double tol = 1e-6;       ///< residual tolerance relative to the top value
    Index max_restarts = 10; ///< restart passes before giving up (flagged, not thrown)
    std::uint64_t seed = 42;
};

struct BlSvdResult {
    PartialSVD svd;
    WarmState warm;      ///< feed into the next related solve
    Index restarts = 0;  ///< passes actually used
};

/// k dominant eigenpairs of a symmetric operator, by largest magnitude.
struct EigenPairs {
    Vector values;    ///< signed eigenvalues, |values| descending
    Matrix vectors;   ///< n x k, orthonormal
    Vector residuals; ///< ||A x - theta x|| per pair
    std::uint64_t matvec_count = 0;
    SolveFlags flags;
};

struct BlEvdResult {
    EigenPairs pairs;
    WarmState warm;
    Index restarts = 0;
};

/// Top-k singular triplets by restarted block Lanczos bidiagonalization.
///
/// Each pass expands the starting block through `steps` applications of the
/// operator, collects the stacked bases U-hat / V-hat, factors the projected
/// matrix U-hat^T A V-hat (assembled for free from cached adjoint products),
/// and measures true residuals ||A v - s u|| for the leading k Ritz
/// triplets. If they miss the tolerance, the top block of right Ritz vectors
/// restarts the next pass. A warm starting block from a nearby matrix
/// typically saves entire passes; the returned WarmState hands the block on.
/// Running out of restarts flags the result unconverged rather than throwing.
BlSvdResult bl_svd(const LinearOperator& op, Index k, const std::optional<WarmState>& warm = {},
                   const BlwsOptions& opts = {});

/// Same scheme for the dominant eigenpairs of a symmetric operator. The
/// operator is probed for symmetry first (validation error on failure); the
/// projected matrix is symmetrized exactly before its eigendecomposition.
BlEvdResult bl_evd(const LinearOperator& op, Index k, const std::optional<WarmState>& warm = {},
                   const BlwsOptions& opts = {});

}  // namespace psvd
