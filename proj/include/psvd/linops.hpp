#pragma once

#include "psvd/core.hpp"

#include <atomic>
#include <cstdint>

namespace psvd {

/// Abstract linear map A : R^cols -> R^rows exposing forward and adjoint
/// products. Iterative drivers only ever touch matrices through this
/// interface, so a user can plug in matrix-free operators.
///
/// Every forward/adjoint product is counted; block products count one per
/// column. Counters are atomic so concurrent probing does not tear, and they
/// can be reset between timed phases.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;

    Index rows() const noexcept { return rows_; }
    Index cols() const noexcept { return cols_; }

    Vector apply(const Vector& x) const {
        if (x.size() != cols_) throw contract_error("apply: size mismatch");
        require_finite(x, "apply input");
        n_forward_.fetch_add(1, std::memory_order_relaxed);
        return apply_impl(x);
    }

    Vector apply_adjoint(const Vector& y) const {
        if (y.size() != rows_) throw contract_error("apply_adjoint: size mismatch");
        require_finite(y, "apply_adjoint input");
        n_adjoint_.fetch_add(1, std::memory_order_relaxed);
        return apply_adjoint_impl(y);
    }

    Matrix apply_block(const Eigen::Ref<const Matrix>& x) const {
        if (x.rows() != cols_) throw contract_error("apply_block: size mismatch");
        require_finite(x, "apply_block input");
        n_forward_.fetch_add(static_cast<std::uint64_t>(x.cols()), std::memory_order_relaxed);
        return apply_block_impl(x);
    }

    Matrix apply_adjoint_block(const Eigen::Ref<const Matrix>& y) const {
        if (y.rows() != rows_) throw contract_error("apply_adjoint_block: size mismatch");
        require_finite(y, "apply_adjoint_block input");
        n_adjoint_.fetch_add(static_cast<std::uint64_t>(y.cols()), std::memory_order_relaxed);
        return apply_adjoint_block_impl(y);
    }

    /// Total products so far, forward plus adjoint.
    std::uint64_t matvec_count() const noexcept {
        return n_forward_.load(std::memory_order_relaxed) +
               n_adjoint_.load(std::memory_order_relaxed);
    }

    void reset_matvec_count() const noexcept {
        n_forward_.store(0, std::memory_order_relaxed);
        n_adjoint_.store(0, std::memory_order_relaxed);
    }

protected:
    LinearOperator(Index rows, Index cols) : rows_(rows), cols_(cols) {
        if (rows < 1 || cols < 1) throw contract_error("operator dimensions must be positive");
    }

    virtual Vector apply_impl(const Vector& x) const = 0;
    virtual Vector apply_adjoint_impl(const Vector& y) const = 0;

    virtual Matrix apply_block_impl(const Eigen::Ref<const Matrix>& x) const {
        Matrix out(rows_, x.cols());
        for (Index j = 0; j < x.cols(); ++j) out.col(j) = apply_impl(x.col(j));
        return out;
    }

    virtual Matrix apply_adjoint_block_impl(const Eigen::Ref<const Matrix>& y) const {
        Matrix out(cols_, y.cols());
        for (Index j = 0; j < y.cols(); ++j) out.col(j) = apply_adjoint_impl(y.col(j));
        return out;
    }

private:
    Index rows_;
    Index cols_;
    mutable std::atomic<std::uint64_t> n_forward_{0};
    mutable std::atomic<std::uint64_t> n_adjoint_{0};
};

/// Explicit dense matrix wrapped as an operator. Owns a copy of the matrix;
/// products are plain GEMV/GEMM.
class DenseOperator : public LinearOperator {
public:
    explicit DenseOperator(Matrix a) : LinearOperator(a.rows(), a.cols()), a_(std::move(a)) {
        require_finite(a_, "dense operator matrix");
    }

    const Matrix& matrix() const noexcept { return a_; }

protected:
    Vector apply_impl(const Vector& x) const override { return a_ * x; }
    Vector apply_adjoint_impl(const Vector& y) const override { return a_.transpose() * y; }
    Matrix apply_block_impl(const Eigen::Ref<const Matrix>& x) const override { return a_ * x; }
    Matrix apply_adjoint_block_impl(const Eigen::Ref<const Matrix>& y) const override {
        return a_.transpose() * y;
    }

private:
    Matrix a_;
};

struct BlockQR {
    Matrix q;     ///< orthonormal columns, same shape as the input
    Matrix r;     ///< square upper-triangular coefficient matrix
    Index rank;   ///< number of numerically independent input columns
};

/// Gram-Schmidt orthonormalization of the columns of `m` (two projection
/// passes per column). A column whose remainder falls below 1e-13 * ||m||_F
/// is declared dependent: it gets a zero diagonal in `r` and is replaced by a
/// random direction orthogonal to everything before it, so `q` always has
/// full column rank. Requires rows >= cols.
BlockQR orthonormalize_block(const Eigen::Ref<const Matrix>& m, Rng& rng);

/// Crude 2-norm estimate by `steps` rounds of power iteration on A^T A.
/// Deterministic for a fixed seed; accurate enough for scaling heuristics.
double estimate_norm2(const LinearOperator& op, int steps, std::uint64_t seed);

}  // namespace psvd
