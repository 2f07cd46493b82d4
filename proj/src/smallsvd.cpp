#include "psvd/smallsvd.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace psvd {
namespace {

constexpr double kOffTol = 1e-14;   // relative column-pair orthogonality target
constexpr double kColDead = 1e-15;  // columns below this (relative to the largest) are spent

// One-sided Jacobi on a square-or-tall W (rows >= cols). Rotates column
// pairs of W until all pairs are numerically orthogonal; V accumulates the
// right rotations. Returns the number of sweeps used, or -1 on cap.
//
// Columns whose norm has fallen below kColDead times the largest column are
// excluded from rotations: they carry no resolvable spectrum, and rotating
// against them regenerates rounding-level coupling forever (a cancelled
// near-parallel column is pure noise, so the relative skip test would never
// settle).
int jacobi_onesided(Matrix& w, Matrix& v, int max_sweeps) {
    const Index n = w.cols();
    std::vector<char> dead(static_cast<size_t>(n), 0);
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        double max_norm = 0.0;
        for (Index j = 0; j < n; ++j) max_norm = std::max(max_norm, w.col(j).norm());
        for (Index j = 0; j < n; ++j)
            if (w.col(j).norm() <= kColDead * max_norm) dead[static_cast<size_t>(j)] = 1;

        bool rotated = false;
        for (Index p = 0; p < n - 1; ++p) {
            if (dead[static_cast<size_t>(p)]) continue;
            for (Index q = p + 1; q < n; ++q) {
                if (dead[static_cast<size_t>(q)]) continue;
                const double app = w.col(p).squaredNorm();
                const double aqq = w.col(q).squaredNorm();
                const double apq = w.col(p).dot(w.col(q));
                if (std::abs(apq) <= kOffTol * std::sqrt(app * aqq)) continue;
                if (apq == 0.0) continue;  // guards app*aqq == 0 as well

                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;

                Vector wp = w.col(p);
                w.col(p) = c * wp - s * w.col(q);
                w.col(q) = s * wp + c * w.col(q);
                Vector vp = v.col(p);
                v.col(p) = c * vp - s * v.col(q);
                v.col(q) = s * vp + c * v.col(q);
                rotated = true;
            }
        }
        if (!rotated) return sweep;
    }
    return -1;
}

// Assemble a thin SVD from the rotated column set: singular values are the
// column norms, sorted descending. Columns at or below the dead threshold are
// noise (or exactly zero), so their left vectors are rebuilt from coordinate
// directions projected off the live ones instead of normalizing the noise.
SvdResult assemble(const Matrix& w, const Matrix& v) {
    const Index m = w.rows();
    const Index n = w.cols();
    std::vector<Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    Vector norms(n);
    double max_norm = 0.0;
    for (Index j = 0; j < n; ++j) {
        norms[j] = w.col(j).norm();
        max_norm = std::max(max_norm, norms[j]);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return norms[a] > norms[b]; });

    SvdResult out;
    out.u = Matrix(m, n);
    out.s = Vector(n);
    out.v = Matrix(v.rows(), n);
    std::vector<char> needs_fill(static_cast<size_t>(n), 0);
    for (Index j = 0; j < n; ++j) {
        const Index src = order[static_cast<size_t>(j)];
        out.s[j] = norms[src];
        out.v.col(j) = v.col(src);
        if (norms[src] > kColDead * max_norm) {
            out.u.col(j) = w.col(src) / norms[src];
        } else {
            needs_fill[static_cast<size_t>(j)] = 1;
            out.u.col(j).setZero();  // completed below
        }
    }
    // Deterministic completion: try unit coordinate vectors, projected off
    // every live column and every already-filled one (no RNG needed).
    for (Index j = 0; j < n; ++j) {
        if (!needs_fill[static_cast<size_t>(j)]) continue;
        for (Index e = 0; e < m; ++e) {
            Vector cand = Vector::Zero(m);
            cand[e] = 1.0;
            for (int pass = 0; pass < 2; ++pass) {
                for (Index i = 0; i < n; ++i) {
                    if (i == j || (needs_fill[static_cast<size_t>(i)] && i > j)) continue;
                    cand -= out.u.col(i).dot(cand) * out.u.col(i);
                }
            }
            const double nrm = cand.norm();
            if (nrm > 0.5) {
                out.u.col(j) = cand / nrm;
                break;
            }
        }
    }
    return out;
}

// Core path for rows >= cols.
SvdResult svd_tall(const Matrix& a, int max_sweeps) {
    const Index m = a.rows();
    const Index n = a.cols();

    if (m > 2 * n) {
        // Thin QR first: SVD of the small triangular factor, then push the
        // orthogonal factor back onto U.
        Eigen::HouseholderQR<Matrix> qr(a);
        Matrix thin_q = qr.householderQ() * Matrix::Identity(m, n);
        Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
        SvdResult small = svd_tall(r, max_sweeps);
        small.u = thin_q * small.u;
        return small;
    }

    Matrix w = a;
    Matrix v = Matrix::Identity(n, n);
    const int sweeps = jacobi_onesided(w, v, max_sweeps);
    SvdResult out = assemble(w, v);
    if (sweeps < 0) {
        throw svd_convergence_error("one-sided Jacobi did not settle within " +
                                        std::to_string(max_sweeps) + " sweeps",
                                    std::move(out));
    }
    return out;
}

}  // namespace

SvdResult svd_dense_capped(const Matrix& a, int max_sweeps) {
    if (a.rows() < 1 || a.cols() < 1) throw contract_error("svd_dense: empty matrix");
    require_finite(a, "svd_dense input");
    if (a.rows() >= a.cols()) return svd_tall(a, max_sweeps);
    // Wide matrix: factor the transpose and swap the roles of U and V.
    SvdResult t = svd_tall(a.transpose(), max_sweeps);
    SvdResult out;
    out.u = std::move(t.v);
    out.s = std::move(t.s);
    out.v = std::move(t.u);
    return out;
}

SvdResult svd_dense(const Matrix& a) { return svd_dense_capped(a, 30); }

SvdResult svd_bidiagonal(const std::vector<double>& alphas, const std::vector<double>& betas) {
    const Index k = static_cast<Index>(alphas.size());
    if (k < 1) throw contract_error("svd_bidiagonal: empty diagonal");
    if (betas.size() != alphas.size())
        throw contract_error("svd_bidiagonal: need one beta per alpha");
    Matrix b = Matrix::Zero(k + 1, k);
    for (Index j = 0; j < k; ++j) {
        b(j, j) = alphas[static_cast<size_t>(j)];
        b(j + 1, j) = betas[static_cast<size_t>(j)];
    }
    return svd_dense(b);
}

EigResult eig_symmetric(const Matrix& s) {
    const Index n = s.rows();
    if (n < 1 || s.cols() != n) throw contract_error("eig_symmetric: matrix must be square");
    require_finite(s, "eig_symmetric input");
    const double scale = s.cwiseAbs().maxCoeff();
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, scale))
        throw contract_error("eig_symmetric: matrix is not symmetric");

    Matrix a = 0.5 * (s + s.transpose());
    Matrix q = Matrix::Identity(n, n);
    const int max_sweeps = 50;
    bool settled = false;
    for (int sweep = 0; sweep < max_sweeps && !settled; ++sweep) {
        settled = true;
        for (Index p = 0; p < n - 1; ++p) {
            for (Index r = p + 1; r < n; ++r) {
                const double apq = a(p, r);
                const double limit =
                    1e-14 * std::max({std::abs(a(p, p)), std::abs(a(r, r)), 1e-300});
                if (std::abs(apq) <= limit) continue;
                settled = false;

                const double theta = (a(r, r) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = c * t;

                // Rotate rows and columns p, r of A and the columns of Q.
                for (Index i = 0; i < n; ++i) {
                    const double aip = a(i, p);
                    const double air = a(i, r);
                    a(i, p) = c * aip - sn * air;
                    a(i, r) = sn * aip + c * air;
                }
                for (Index i = 0; i < n; ++i) {
                    const double api = a(p, i);
                    const double ari = a(r, i);
                    a(p, i) = c * api - sn * ari;
                    a(r, i) = sn * api + c * ari;
                }
                for (Index i = 0; i < n; ++i) {
                    const double qip = q(i, p);
                    const double qir = q(i, r);
                    q(i, p) = c * qip - sn * qir;
                    q(i, r) = sn * qip + c * qir;
                }
            }
        }
    }
    if (!settled) throw convergence_error("symmetric Jacobi did not settle within 50 sweeps");

    std::vector<Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index x, Index y) { return a(x, x) > a(y, y); });
    EigResult out;
    out.values = Vector(n);
    out.vectors = Matrix(n, n);
    for (Index j = 0; j < n; ++j) {
        out.values[j] = a(order[static_cast<size_t>(j)], order[static_cast<size_t>(j)]);
        out.vectors.col(j) = q.col(order[static_cast<size_t>(j)]);
    }
    return out;
}

}  // namespace psvd
