#include "psvd/linops.hpp"

namespace psvd {

double orthonormality_error(const Eigen::Ref<const Matrix>& q) {
    if (q.cols() == 0) return 0.0;
    Matrix g = q.transpose() * q;
    g.diagonal().array() -= 1.0;
    return g.cwiseAbs().maxCoeff();
}

BlockQR orthonormalize_block(const Eigen::Ref<const Matrix>& m, Rng& rng) {
    const Index n = m.rows();
    const Index b = m.cols();
    if (b > n) throw contract_error("orthonormalize_block: more columns than rows");
    require_finite(m, "orthonormalize_block input");

    BlockQR out;
    out.q = Matrix(n, b);
    out.r = Matrix::Zero(b, b);
    out.rank = 0;

    const double scale = m.norm();
    const double drop_tol = 1e-13 * scale;

    for (Index j = 0; j < b; ++j) {
        Vector v = m.col(j);
        // Two classical Gram-Schmidt passes; coefficients from both passes
        // accumulate into r so q*r still reconstructs the input column.
        for (int pass = 0; pass < 2; ++pass) {
            if (j > 0) {
                Vector c = out.q.leftCols(j).transpose() * v;
                v.noalias() -= out.q.leftCols(j) * c;
                out.r.col(j).head(j) += c;
            }
        }
        const double nrm = v.norm();
        if (nrm > drop_tol) {
            out.r(j, j) = nrm;
            out.q.col(j) = v / nrm;
            ++out.rank;
            continue;
        }
        // Dependent column: keep a zero diagonal in r (the reconstruction of
        // this column needs nothing new) and fill q with a random direction
        // orthogonal to the columns already accepted.
        for (;;) {
            Vector w = rng.normal_vector(n);
            const double raw = w.norm();
            for (int pass = 0; pass < 2; ++pass) {
                if (j > 0) {
                    Vector c = out.q.leftCols(j).transpose() * w;
                    w.noalias() -= out.q.leftCols(j) * c;
                }
            }
            const double left = w.norm();
            if (left > 0.1 * raw) {  // comfortably outside the current span
                out.q.col(j) = w / left;
                break;
            }
        }
    }
    return out;
}

double estimate_norm2(const LinearOperator& op, int steps, std::uint64_t seed) {
    Rng rng(seed);
    Vector v = rng.unit_vector(op.cols());
    double sigma = 0.0;
    for (int it = 0; it < steps; ++it) {
        Vector u = op.apply(v);
        const double nu = u.norm();
        if (nu == 0.0) return 0.0;
        v = op.apply_adjoint(u / nu);
        sigma = v.norm();
        if (sigma == 0.0) return 0.0;
        v /= sigma;
    }
    return sigma;
}

}  // namespace psvd
