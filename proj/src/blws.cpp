#include "psvd/blws.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace psvd {

namespace {

void validate_options(const BlwsOptions& opts) {
    if (opts.steps < 1) throw contract_error("blws: steps must be at least 1");
    if (opts.max_restarts < 1) throw contract_error("blws: max_restarts must be at least 1");
    if (!(opts.tol > 0.0)) throw contract_error("blws: tolerance must be positive");
}

// Two full projection passes of the columns of W against the first `ncols`
// columns of Q (block classical Gram-Schmidt).
void project_off(Matrix& w, const Matrix& q, Index ncols) {
    if (ncols == 0) return;
    for (int pass = 0; pass < 2; ++pass) {
        Matrix c = q.leftCols(ncols).transpose() * w;
        w.noalias() -= q.leftCols(ncols) * c;
    }
}

// Starting block of width b: warm columns first (validated against n), the
// remainder random, everything orthonormalized.
Matrix starting_block(Index n, Index b, const std::optional<WarmState>& warm, Rng& rng) {
    Matrix m(n, b);
    Index used = 0;
    if (warm && warm->block.size() > 0) {
        if (warm->block.rows() != n)
            throw contract_error("warm start block has the wrong number of rows");
        require_finite(warm->block, "warm start block");
        used = std::min<Index>(b, warm->block.cols());
        m.leftCols(used) = warm->block.leftCols(used);
    }
    if (used < b) m.rightCols(b - used) = rng.normal_matrix(n, b - used);
    return orthonormalize_block(m, rng).q;
}

struct SvdPass {
    SvdResult factors;   // of the projected matrix
    Matrix uhat, vhat;   // stacked bases actually filled
    Index ucols = 0, vcols = 0;
};

// One restart pass of block bidiagonalization starting from v0 (n x b,
// orthonormal). Expands up to `steps` U-blocks, caps block widths so the
// bases never exceed the operator dimensions, and factors the projected
// matrix assembled from the cached adjoint products.
SvdPass svd_pass(const LinearOperator& op, const Matrix& v0, Index steps, Rng& rng) {
    const Index m = op.rows();
    const Index n = op.cols();
    const Index b = v0.cols();

    const Index ucap = std::min(m, steps * b);
    const Index vcap = std::min(n, (steps + 1) * b);
    SvdPass pass;
    pass.uhat = Matrix(m, ucap);
    pass.vhat = Matrix(n, vcap);
    Matrix zbig(n, ucap);  // adjoint products aligned with uhat columns

    pass.vhat.leftCols(b) = v0;
    pass.vcols = b;
    Index prev_off = 0, prev_w = b;

    for (Index j = 0; j < steps; ++j) {
        const Index wu = std::min(prev_w, m - pass.ucols);
        if (wu <= 0) break;
        Matrix w = op.apply_block(pass.vhat.middleCols(prev_off, wu));
        project_off(w, pass.uhat, pass.ucols);
        pass.uhat.middleCols(pass.ucols, wu) = orthonormalize_block(w, rng).q;
        Matrix z = op.apply_adjoint_block(pass.uhat.middleCols(pass.ucols, wu));
        zbig.middleCols(pass.ucols, wu) = z;
        pass.ucols += wu;

        const Index wv = std::min(wu, n - pass.vcols);
        if (wv > 0) {
            Matrix vnew = z.leftCols(wv);
            project_off(vnew, pass.vhat, pass.vcols);
            pass.vhat.middleCols(pass.vcols, wv) = orthonormalize_block(vnew, rng).q;
            prev_off = pass.vcols;
            prev_w = wv;
            pass.vcols += wv;
        } else {
            prev_w = 0;  // no fresh right block to expand from
        }
    }

    // Projected matrix U-hat^T A V-hat, row block j being Z_j^T V-hat; the
    // cached adjoint products make this a single GEMM with no extra matvecs.
    Matrix small = zbig.leftCols(pass.ucols).transpose() * pass.vhat.leftCols(pass.vcols);
    pass.factors = svd_dense(small);
    return pass;
}

}  // namespace

BlSvdResult bl_svd(const LinearOperator& op, Index k, const std::optional<WarmState>& warm,
                   const BlwsOptions& opts) {
    validate_options(opts);
    const Index minmn = std::min(op.rows(), op.cols());
    if (k < 1 || k > minmn) throw contract_error("bl_svd: k out of range");
    Index b = opts.block_size == 0 ? k : opts.block_size;
    if (b < k) throw contract_error("bl_svd: block size below k");
    b = std::min(b, minmn);

    const std::uint64_t mv_start = op.matvec_count();
    Rng rng(opts.seed);
    Matrix v0 = starting_block(op.cols(), b, warm, rng);

    BlSvdResult out;
    bool converged = false;
    SvdPass pass;
    for (Index t = 0; t < opts.max_restarts; ++t) {
        pass = svd_pass(op, v0, opts.steps, rng);
        ++out.restarts;

        const Index r = std::min<Index>(k, pass.factors.s.size());
        out.svd.u = pass.uhat.leftCols(pass.ucols) * pass.factors.u.leftCols(r);
        out.svd.v = pass.vhat.leftCols(pass.vcols) * pass.factors.v.leftCols(r);
        out.svd.s = pass.factors.s.head(r);
        out.svd.bounds = Vector(r);
        converged = true;
        for (Index i = 0; i < r; ++i) {
            Vector lhs = op.apply(out.svd.v.col(i));
            out.svd.bounds[i] = (lhs - out.svd.s[i] * out.svd.u.col(i)).norm();
            if (out.svd.bounds[i] > opts.tol * std::max(out.svd.s[0], 0.0)) converged = false;
        }

        // Next starting block: the top-b right Ritz directions.
        const Index wb = std::min<Index>(b, pass.factors.s.size());
        Matrix next = pass.vhat.leftCols(pass.vcols) * pass.factors.v.leftCols(wb);
        v0 = orthonormalize_block(next, rng).q;
        if (converged) break;
    }

    out.svd.matvec_count = op.matvec_count() - mv_start;
    out.svd.work_size = pass.vcols;
    out.svd.flags.unconverged = !converged;
    out.warm.block = v0;
    out.warm.rank_hint = b;
    out.warm.generation = (warm ? warm->generation : 0) + 1;
    return out;
}

BlEvdResult bl_evd(const LinearOperator& op, Index k, const std::optional<WarmState>& warm,
                   const BlwsOptions& opts) {
    validate_options(opts);
    if (op.rows() != op.cols()) throw contract_error("bl_evd: operator must be square");
    const Index n = op.rows();
    if (k < 1 || k > n) throw contract_error("bl_evd: k out of range");
    Index b = opts.block_size == 0 ? k : opts.block_size;
    if (b < k) throw contract_error("bl_evd: block size below k");
    b = std::min(b, n);

    const std::uint64_t mv_start = op.matvec_count();
    Rng rng(opts.seed);

    // Symmetry probe: <Ax, y> must equal <x, Ay> for a handful of random
    // pairs before we trust the two-sided projection.
    for (int probe = 0; probe < 5; ++probe) {
        Vector x = rng.unit_vector(n);
        Vector y = rng.unit_vector(n);
        Vector ax = op.apply(x);
        Vector ay = op.apply(y);
        const double lhs = ax.dot(y);
        const double rhs = x.dot(ay);
        const double scale = ax.norm() + ay.norm() + 1e-300;
        if (std::abs(lhs - rhs) > 1e-10 * scale)
            throw validation_error("bl_evd: operator failed the symmetry probe");
    }

    Matrix x0 = starting_block(n, b, warm, rng);

    BlEvdResult out;
    bool converged = false;
    for (Index t = 0; t < opts.max_restarts; ++t) {
        ++out.restarts;
        const Index xcap = std::min(n, opts.steps * b);
        Matrix xhat(n, xcap);
        Matrix ybig(n, xcap);
        xhat.leftCols(b) = x0;
        Index xcols = b;
        Index off = 0, w = b;
        Index applied = 0;
        for (Index j = 0; j < opts.steps && w > 0; ++j) {
            Matrix y = op.apply_block(xhat.middleCols(off, w));
            ybig.middleCols(off, w) = y;
            applied = off + w;
            if (j + 1 < opts.steps) {
                const Index wn = std::min(w, n - xcols);
                if (wn > 0) {
                    Matrix xn = y.leftCols(wn);
                    project_off(xn, xhat, xcols);
                    xhat.middleCols(xcols, wn) = orthonormalize_block(xn, rng).q;
                    off = xcols;
                    w = wn;
                    xcols += wn;
                } else {
                    w = 0;
                }
            }
        }

        Matrix t_small = xhat.leftCols(applied).transpose() * ybig.leftCols(applied);
        t_small = 0.5 * (t_small + t_small.transpose()).eval();
        EigResult eig = eig_symmetric(t_small);

        // Dominant pairs: order by eigenvalue magnitude.
        std::vector<Index> order(static_cast<size_t>(eig.values.size()));
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Index a, Index c) {
            return std::abs(eig.values[a]) > std::abs(eig.values[c]);
        });

        const Index r = std::min<Index>(k, eig.values.size());
        out.pairs.values = Vector(r);
        out.pairs.vectors = Matrix(n, r);
        out.pairs.residuals = Vector(r);
        converged = true;
        for (Index i = 0; i < r; ++i) {
            const Index j = order[static_cast<size_t>(i)];
            out.pairs.values[i] = eig.values[j];
            out.pairs.vectors.col(i) = xhat.leftCols(applied) * eig.vectors.col(j);
            Vector resid =
                op.apply(out.pairs.vectors.col(i)) - eig.values[j] * out.pairs.vectors.col(i);
            out.pairs.residuals[i] = resid.norm();
            if (out.pairs.residuals[i] > opts.tol * std::abs(out.pairs.values[0]))
                converged = false;
        }

        const Index wb = std::min<Index>(b, eig.values.size());
        Matrix next(n, wb);
        for (Index i = 0; i < wb; ++i)
            next.col(i) = xhat.leftCols(applied) * eig.vectors.col(order[static_cast<size_t>(i)]);
        x0 = orthonormalize_block(next, rng).q;
        if (converged) break;
    }

    out.pairs.matvec_count = op.matvec_count() - mv_start;
    out.pairs.flags.unconverged = !converged;
    out.warm.block = x0;
    out.warm.rank_hint = b;
    out.warm.generation = (warm ? warm->generation : 0) + 1;
    return out;
}

}  // namespace psvd
