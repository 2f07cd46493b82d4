#include "psvd/partialsvd.hpp"

#include <algorithm>
#include <cmath>

namespace psvd {

namespace {

// Gathers the triplets at `which` positions of the Ritz set back into the
// outer coordinates through the Lanczos bases.
PartialSVD gather(const GKLState& state, const RitzSet& rz, const std::vector<Index>& which) {
    PartialSVD out;
    const Index c = static_cast<Index>(which.size());
    out.u = Matrix(state.op().rows(), c);
    out.v = Matrix(state.op().cols(), c);
    out.s = Vector(c);
    out.bounds = Vector(c);
    for (Index i = 0; i < c; ++i) {
        const Index j = which[static_cast<size_t>(i)];
        out.s[i] = rz.values[j];
        out.bounds[i] = rz.bounds[j];
        out.u.col(i) = state.left_basis() * rz.left_small.col(j);
        out.v.col(i) = state.right_basis() * rz.right_small.col(j);
    }
    out.work_size = state.right_count();
    return out;
}

Index resolve_cap(const LinearOperator& op, const ThresholdOptions& opts) {
    const Index minmn = std::min(op.rows(), op.cols());
    const Index cap = opts.max_k == 0 ? minmn : std::min(opts.max_k, minmn);
    if (opts.initial_k < 1) throw contract_error("initial_k must be at least 1");
    if (!(opts.tol > 0.0)) throw contract_error("tolerance must be positive");
    if (cap < 1) throw contract_error("subspace cap must be at least 1");
    return cap;
}

}  // namespace

RitzSet ritz_from_state(const GKLState& state, double tol) {
    if (!(tol > 0.0)) throw contract_error("ritz_from_state: tolerance must be positive");
    if (state.right_count() == 0 && !state.breakdown())
        throw contract_error("ritz_from_state: extend the state first");

    RitzSet rz;
    const Index nv = state.right_count();
    if (nv == 0) return rz;  // breakdown before the first step: nothing to report

    // On the normal (K+1) x K boundary hand the recurrence coefficients to the
    // bidiagonal factorizer directly; breakdown shapes (square B, short B) go
    // through the state's assembly so their geometry is honored.
    SvdResult svd;
    if (!state.breakdown() && state.left_count() == nv + 1) {
        const std::vector<double>& betas = state.betas();
        svd = svd_bidiagonal(state.alphas(),
                             std::vector<double>(betas.begin() + 1, betas.end()));
    } else {
        svd = svd_dense(state.assemble_bidiagonal());
    }
    rz.values = svd.s;
    rz.left_small = svd.u;
    rz.right_small = svd.v;

    const Index minmn = std::min(state.op().rows(), state.op().cols());
    rz.exact = state.breakdown() || nv == minmn;

    rz.bounds = Vector::Zero(nv);
    if (!rz.exact) {
        // Residual of Ritz pair j is the trailing beta scaled by the last
        // component of the corresponding left vector of B.
        const double last_beta = state.betas().back();
        const Index last_row = state.left_count() - 1;
        for (Index j = 0; j < nv; ++j)
            rz.bounds[j] = last_beta * std::abs(rz.left_small(last_row, j));
    }

    rz.converged.assign(static_cast<size_t>(nv), 0);
    const double floor = rz.values.size() > 0 ? 1e-3 * rz.values[0] : 0.0;
    double minsv = 0.0;
    bool any = false;
    for (Index j = 0; j < nv; ++j) {
        if (rz.bounds[j] <= tol * std::max(rz.values[j], floor)) {
            rz.converged[static_cast<size_t>(j)] = 1;
            ++rz.neig;
            minsv = any ? std::min(minsv, rz.values[j]) : rz.values[j];
            any = true;
        }
    }
    if (any) rz.minsv = minsv;
    return rz;
}

Index update_subspace_size(Index k, Index neig, Index n_above, Index cap) {
    if (k < 1) throw contract_error("update_subspace_size: current size must be positive");
    if (neig < 0 || n_above < 0) throw contract_error("update_subspace_size: negative count");
    if (cap < 1) throw contract_error("update_subspace_size: cap must be positive");
    long long next;
    if (neig > 0) {
        const long long scaled = std::llround(static_cast<double>(n_above) *
                                              static_cast<double>(k) / static_cast<double>(neig));
        next = std::min<long long>(k + 100, std::max<long long>(k + 2, scaled));
    } else {
        next = 2LL * k;
    }
    return static_cast<Index>(std::min<long long>(next, cap));
}

PartialSVD svd_above_threshold(const LinearOperator& op, double svthr,
                               const ThresholdOptions& opts) {
    if (svthr < 0.0) throw validation_error("threshold must be non-negative");
    const Index cap = resolve_cap(op, opts);

    const std::uint64_t mv_start = op.matvec_count();
    Rng rng(opts.seed);
    GKLState state(op, rng.unit_vector(op.rows()));
    Index k = std::min(opts.initial_k, cap);
    bool truncated = false;

    RitzSet rz;
    for (;;) {
        state.extend(k, opts.reorth);
        rz = ritz_from_state(state, opts.tol);
        if (rz.exact) break;

        Index n_above = 0;
        bool above_all_converged = true;
        for (Index j = 0; j < rz.values.size(); ++j) {
            if (rz.values[j] > svthr) {
                ++n_above;
                if (!rz.converged[static_cast<size_t>(j)]) above_all_converged = false;
            }
        }
        const bool bracketed = rz.minsv.has_value() && *rz.minsv < svthr;
        if (bracketed && above_all_converged) break;

        if (k >= cap) {
            truncated = true;
            break;
        }
        k = update_subspace_size(k, rz.neig, n_above, cap);
    }

    std::vector<Index> keep;
    for (Index j = 0; j < rz.values.size(); ++j)
        if (rz.converged[static_cast<size_t>(j)] && rz.values[j] > svthr) keep.push_back(j);

    PartialSVD out = gather(state, rz, keep);
    out.matvec_count = op.matvec_count() - mv_start;
    out.flags.truncated = truncated;
    out.flags.unconverged = truncated;
    return out;
}

PartialSVD svd_top_k(const LinearOperator& op, Index k, const ThresholdOptions& opts) {
    const Index minmn = std::min(op.rows(), op.cols());
    if (k < 1 || k > minmn) throw contract_error("svd_top_k: k out of range");
    const Index cap = resolve_cap(op, opts);
    if (cap < k) throw contract_error("svd_top_k: subspace cap below k");

    const std::uint64_t mv_start = op.matvec_count();
    Rng rng(opts.seed);
    GKLState state(op, rng.unit_vector(op.rows()));
    Index work = std::min(std::max(opts.initial_k, 2 * k), cap);
    bool truncated = false;

    RitzSet rz;
    for (;;) {
        state.extend(work, opts.reorth);
        rz = ritz_from_state(state, opts.tol);

        bool have_top_k = rz.values.size() >= k;
        for (Index j = 0; have_top_k && j < k; ++j)
            if (!rz.converged[static_cast<size_t>(j)]) have_top_k = false;
        if (have_top_k) break;

        if (state.breakdown()) {
            // The invariant subspace ran out before k triplets appeared:
            // repeated (or zero) singular values. Deflate past it.
            if (state.right_count() < minmn) {
                state.restart_with_random_direction(rng, opts.reorth);
                work = std::max(work, state.right_count());
                continue;
            }
            break;
        }
        if (rz.exact) break;  // full subspace: everything available is here

        if (work >= cap) {
            truncated = true;
            break;
        }
        work = update_subspace_size(work, rz.neig, k, cap);
    }

    const Index c = std::min<Index>(k, rz.values.size());
    std::vector<Index> keep;
    for (Index j = 0; j < c; ++j) keep.push_back(j);
    PartialSVD out = gather(state, rz, keep);
    out.matvec_count = op.matvec_count() - mv_start;
    out.flags.truncated = truncated;
    for (Index j = 0; j < c; ++j)
        if (!rz.converged[static_cast<size_t>(j)]) out.flags.unconverged = true;
    return out;
}

}  // namespace psvd
