#pragma once

#include "psvd/linops.hpp"

#include <vector>

namespace psvd {

/// How a residual is re-orthogonalized against the stored basis.
///
/// Both kernels compute the same classical Gram-Schmidt projection and are
/// arranged to execute the identical floating-point operation sequence per
/// coefficient and per vector element, so switching kernels never changes a
/// single bit of the result. `fused` tiles the basis and carries four
/// independent accumulator chains across columns, which keeps more FP adds
/// in flight; `vector_loop` is the plain one-column-at-a-time reference.
struct ReorthPolicy {
    enum class Kernel { fused, vector_loop };
    Kernel kernel = Kernel::fused;
    int passes = 2;       ///< full projection passes, 1..3 ("twice is enough")
    double eta = 0.7071;  ///< with passes == 1, a norm drop below eta triggers one extra pass
};

/// Projects `r` against the first `ncols` columns of `basis` (in place)
/// following `policy`, and returns the norm of the result. `basis` may have
/// spare capacity columns beyond `ncols`; they are never touched. An empty
/// basis leaves `r` unchanged.
double reorthogonalize(Vector& r, const Matrix& basis, Index ncols, const ReorthPolicy& policy);

/// Golub-Kahan-Lanczos bidiagonalization, kept as a resumable state machine.
///
/// After k completed steps the state holds orthonormal bases U (k+1 columns)
/// and V (k columns) with A*V = U*B for the (k+1) x k lower-bidiagonal B
/// carrying alphas on the diagonal and betas[1..] on the subdiagonal
/// (betas[0] is the norm of the starting vector). Construction performs the
/// initialization step from a starting vector p0 (u1 = p0/||p0||); extend()
/// then advances any number of steps and can be called repeatedly.
///
/// A residual norm falling below 1e-13 times the running estimate of ||A||
/// is a breakdown: the factorization is exact and extension stops. The state
/// records on which side (alpha/beta) and at which step it happened.
/// restart_with_random_direction() deflates past a breakdown by injecting a
/// random direction orthogonal to the basis with a zero coupling
/// coefficient, which keeps A*V = U*B valid; drivers that need more triplets
/// than the invariant subspace holds (e.g. repeated singular values) use it.
class GKLState {
public:
    GKLState(const LinearOperator& op, const Vector& p0);

    const LinearOperator& op() const noexcept { return *op_; }
    Index left_count() const noexcept { return nu_; }
    Index right_count() const noexcept { return nv_; }

    /// 1-based index of the next step to run (frozen at the breakdown step
    /// while the state is broken down).
    Index step_index() const noexcept { return breakdown_ != Side::none ? breakdown_step_ : nv_ + 1; }

    Eigen::Ref<const Matrix> left_basis() const { return u_.leftCols(nu_); }
    Eigen::Ref<const Matrix> right_basis() const { return v_.leftCols(nv_); }
    const std::vector<double>& alphas() const noexcept { return alphas_; }
    const std::vector<double>& betas() const noexcept { return betas_; }

    bool breakdown() const noexcept { return breakdown_ != Side::none; }
    Index breakdown_step() const noexcept { return breakdown_step_; }
    double norm_estimate() const noexcept { return norm_estimate_; }

    /// Runs steps until step_index() > k_target or a breakdown occurs.
    /// k_target must lie in [step_index()-1, min(rows, cols)]; calling with
    /// the current step count is a no-op, going backwards is a contract
    /// error. On a broken-down state this is a no-op.
    void extend(Index k_target, const ReorthPolicy& policy = {});

    /// Dense (left_count x right_count) bidiagonal factor B.
    Matrix assemble_bidiagonal() const;

    /// Deflates past a breakdown (see class comment). For an alpha-side
    /// breakdown the interrupted step is completed afterwards, so the state
    /// returns to a step boundary unless a fresh breakdown occurs — callers
    /// should loop. Contract error if not broken down or the corresponding
    /// basis is already complete.
    void restart_with_random_direction(Rng& rng, const ReorthPolicy& policy = {});

private:
    enum class Side { none, alpha, beta };

    void ensure_left_capacity(Index cols);
    void ensure_right_capacity(Index cols);
    bool step_v_side(const ReorthPolicy& policy);
    bool step_u_side(const ReorthPolicy& policy);

    const LinearOperator* op_;
    Matrix u_, v_;  // capacity-managed; the first nu_/nv_ columns are live
    Index nu_ = 0, nv_ = 0;
    std::vector<double> alphas_, betas_;
    Side breakdown_ = Side::none;
    Index breakdown_step_ = 0;
    double norm_estimate_ = 0.0;
};

namespace detail {
// Reorthogonalization kernels, compiled without FP contraction so both modes
// stay bit-identical. coeff[j] = <basis col j, r>, summed in ascending row
// order; subtract applies r -= sum_j coeff[j] * basis col j, ascending j.
void reorth_coefficients_loop(const double* basis, Index rows, Index ncols, const double* r,
                              double* coeff);
void reorth_coefficients_fused(const double* basis, Index rows, Index ncols, const double* r,
                               double* coeff);
void reorth_subtract_loop(const double* basis, Index rows, Index ncols, const double* coeff,
                          double* r);
void reorth_subtract_fused(const double* basis, Index rows, Index ncols, const double* coeff,
                           double* r);
}  // namespace detail

}  // namespace psvd
