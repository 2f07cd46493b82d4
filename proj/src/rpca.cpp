#include "psvd/rpca.hpp"

#include <algorithm>
#include <cmath>

namespace psvd {

double soft_threshold(double x, double tau) {
    if (tau < 0.0) throw contract_error("soft_threshold: tau must be non-negative");
    const double mag = std::abs(x) - tau;
    return mag > 0.0 ? (x > 0.0 ? mag : -mag) : 0.0;
}

Matrix soft_threshold(const Matrix& x, double tau) {
    if (tau < 0.0) throw contract_error("soft_threshold: tau must be non-negative");
    require_finite(x, "soft_threshold input");
    return x.unaryExpr([tau](double v) {
        const double mag = std::abs(v) - tau;
        return mag > 0.0 ? (v > 0.0 ? mag : -mag) : 0.0;
    });
}

SvtResult svt(const Matrix& a, double tau, const SvtOptions& opts,
              const std::optional<WarmState>& warm) {
    if (!(tau > 0.0)) throw contract_error("svt: tau must be positive");
    if (a.rows() < 1 || a.cols() < 1) throw contract_error("svt: empty matrix");
    require_finite(a, "svt input");

    DenseOperator op(a);
    const Index minmn = std::min(a.rows(), a.cols());
    SvtResult out;

    if (opts.backend == SvtBackend::threshold) {
        ThresholdOptions topt;
        topt.tol = opts.tol;
        topt.seed = opts.seed;
        PartialSVD part = svd_above_threshold(op, tau, topt);
        out.rank = part.s.size();
        out.x = Matrix::Zero(a.rows(), a.cols());
        for (Index i = 0; i < part.s.size(); ++i)
            out.x.noalias() += (part.s[i] - tau) * part.u.col(i) * part.v.col(i).transpose();
        out.matvec_count = part.matvec_count;
        out.warm = warm;  // untouched: this backend does not consume the subspace
        return out;
    }

    // blws backend: request k values, doubling until one of them falls to or
    // below tau (or the factorization is complete), so nothing above tau can
    // be missed.
    BlwsOptions bopt;
    bopt.tol = opts.tol;
    bopt.seed = opts.seed;
    bopt.max_restarts = 30;
    Index k = std::max<Index>(1, std::min(opts.rank_guess, minmn));
    if (warm && warm->rank_hint > 0) k = std::min(std::max(k, warm->rank_hint), minmn);

    std::optional<WarmState> carry = warm;
    std::uint64_t matvecs = 0;
    for (;;) {
        bopt.block_size = k;
        BlSvdResult res = bl_svd(op, k, carry, bopt);
        matvecs += res.svd.matvec_count;
        carry = res.warm;
        const bool complete = k >= minmn;
        const bool tail_seen = res.svd.s.size() > 0 && res.svd.s[res.svd.s.size() - 1] <= tau;
        if (tail_seen || complete) {
            out.x = Matrix::Zero(a.rows(), a.cols());
            Index rank = 0;
            for (Index i = 0; i < res.svd.s.size(); ++i) {
                if (res.svd.s[i] > tau) {
                    out.x.noalias() +=
                        (res.svd.s[i] - tau) * res.svd.u.col(i) * res.svd.v.col(i).transpose();
                    ++rank;
                }
            }
            out.rank = rank;
            out.matvec_count = matvecs;
            out.warm = std::move(carry);
            return out;
        }
        k = std::min(2 * k, minmn);
    }
}

RpcaResult rpca_ialm(const Matrix& d, const RpcaOptions& opts) {
    if (d.rows() < 1 || d.cols() < 1) throw contract_error("rpca_ialm: empty matrix");
    require_finite(d, "rpca_ialm input");
    if (!(opts.rho > 1.0)) throw contract_error("rpca_ialm: rho must exceed 1");
    if (!(opts.tol > 0.0)) throw contract_error("rpca_ialm: tolerance must be positive");
    if (opts.max_iter < 1) throw contract_error("rpca_ialm: max_iter must be positive");

    const Index m = d.rows();
    const Index n = d.cols();
    RpcaResult out;
    const double norm_d = d.norm();
    if (norm_d == 0.0) {
        out.l = Matrix::Zero(m, n);
        out.e = Matrix::Zero(m, n);
        out.converged = true;
        return out;
    }

    const double lambda =
        opts.lambda > 0.0 ? opts.lambda : 1.0 / std::sqrt(static_cast<double>(std::max(m, n)));
    DenseOperator dop(d);
    const double norm2 = estimate_norm2(dop, 10, opts.seed);
    double mu = opts.mu0 > 0.0 ? opts.mu0 : 1.25 / norm2;
    const double mu_cap = mu * 1e7;

    // Dual variable scaled so the initial multiplier is feasible for both
    // the nuclear and the scaled l1 norm.
    const double j_scale = std::max(norm2, d.cwiseAbs().maxCoeff() / lambda);
    Matrix y = d / j_scale;
    Matrix l = Matrix::Zero(m, n);
    Matrix e = Matrix::Zero(m, n);

    SvtOptions svt_opts;
    svt_opts.backend = opts.backend;
    svt_opts.seed = opts.seed;
    std::optional<WarmState> warm;
    Index last_rank = 0;
    std::uint64_t matvecs = 0;

    for (Index iter = 1; iter <= opts.max_iter; ++iter) {
        const double tau = 1.0 / mu;
        svt_opts.rank_guess = std::max<Index>(last_rank + 5, 10);
        SvtResult sv = svt(d - e + y / mu, tau, svt_opts, warm);
        l = std::move(sv.x);
        last_rank = sv.rank;
        warm = std::move(sv.warm);
        matvecs += sv.matvec_count;

        e = soft_threshold(d - l + y / mu, lambda / mu);
        Matrix z = d - l - e;
        y.noalias() += mu * z;

        RpcaIterRecord rec;
        rec.iter = iter;
        rec.rel_residual = z.norm() / norm_d;
        rec.rank = last_rank;
        rec.sparsity = (e.array() != 0.0).count();
        rec.threshold = tau;
        rec.matvecs = matvecs;
        out.history.push_back(rec);
        out.iterations = iter;

        if (rec.rel_residual < opts.tol) {
            out.converged = true;
            break;
        }
        mu = std::min(mu * opts.rho, mu_cap);
    }

    out.l = std::move(l);
    out.e = std::move(e);
    out.matvec_count = matvecs;
    return out;
}

}  // namespace psvd
