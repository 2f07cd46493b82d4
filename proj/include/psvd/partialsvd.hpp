#pragma once

#include "psvd/lanczos.hpp"
#include "psvd/smallsvd.hpp"

#include <cstdint>
#include <optional>

namespace psvd {

/// Ritz data extracted from a bidiagonalization state.
struct RitzSet {
    Vector values;                        ///< approximate singular values, descending
    Vector bounds;                        ///< residual error bound per value
    std::vector<std::uint8_t> converged;  ///< bounds[j] small relative to values[j]
    Index neig = 0;                       ///< number of converged values
    std::optional<double> minsv;          ///< smallest converged value, if any
    bool exact = true;                    ///< breakdown or full subspace: values exact
    Matrix left_small;                    ///< left singular vectors of B
    Matrix right_small;                   ///< right singular vectors of B
};

/// Singular values and bounds of the current bidiagonal factor. A value
/// counts as converged when its bound is at most tol * max(value, 1e-3 *
/// largest value). After a breakdown or once the subspace spans min(rows,
/// cols) directions the factorization is exact and all bounds are zero.
RitzSet ritz_from_state(const GKLState& state, double tol);

struct SolveFlags {
    bool truncated = false;    ///< subspace cap reached before the stopping rule
    bool unconverged = false;  ///< some returned triplet missed its tolerance
};

/// A partial singular value decomposition: c triplets with residual bounds.
struct PartialSVD {
    Matrix u;       ///< rows x c
    Vector s;       ///< c singular values, descending
    Matrix v;       ///< cols x c
    Vector bounds;  ///< c error bounds (residual norms)
    std::uint64_t matvec_count = 0;
    Index work_size = 0;  ///< subspace dimension actually used
    SolveFlags flags;
};

struct ThresholdOptions {
    Index initial_k = 16;   ///< first subspace size (clamped to the cap)
    Index max_k = 0;        ///< subspace cap; 0 means min(rows, cols)
    double tol = 1e-8;      ///< relative tolerance for declaring a value converged
    std::uint64_t seed = 42;
    ReorthPolicy reorth{};
};

/// Next subspace size for the adaptive growth rule. With `neig` converged
/// values out of which `n_above` lie above the threshold, the size scales
/// proportionally (never by less than 2, never by more than 100); with
/// nothing converged yet it doubles. The result is clamped to `cap`.
Index update_subspace_size(Index k, Index neig, Index n_above, Index cap);

/// All singular triplets with value strictly above `svthr`.
///
/// Grows a bidiagonalization until either the smallest converged value drops
/// below the threshold (with every value above it converged) or the
/// factorization becomes exact. Ties at the threshold are excluded. If the
/// subspace cap is reached first, the result is flagged truncated and holds
/// the converged above-threshold triplets found so far. A negative threshold
/// is a validation error.
PartialSVD svd_above_threshold(const LinearOperator& op, double svthr,
                               const ThresholdOptions& opts = {});

/// The k largest singular triplets (1 <= k <= min(rows, cols)).
///
/// Same engine as the threshold driver, but the stopping rule is "top k
/// converged". Breakdowns before k triplets exist (repeated or zero singular
/// values) are deflated past with random restarts, so multiplicities are
/// counted correctly.
PartialSVD svd_top_k(const LinearOperator& op, Index k, const ThresholdOptions& opts = {});

}  // namespace psvd
