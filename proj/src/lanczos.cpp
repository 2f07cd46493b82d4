#include "psvd/lanczos.hpp"

#include <algorithm>
#include <cmath>

namespace psvd {

namespace {
// Residual norms at or below this fraction of the running ||A|| estimate
// count as breakdowns (the factorization is exact to working precision).
constexpr double kBreakdownRel = 1e-13;

void validate_policy(const ReorthPolicy& policy) {
    if (policy.passes < 1 || policy.passes > 3)
        throw contract_error("reorth policy: passes must be 1, 2 or 3");
    if (!(policy.eta > 0.0) || policy.eta > 1.0)
        throw contract_error("reorth policy: eta must lie in (0, 1]");
}

void run_pass(Vector& r, const Matrix& basis, Index ncols, ReorthPolicy::Kernel kernel,
              Vector& coeff) {
    const Index rows = basis.rows();
    if (kernel == ReorthPolicy::Kernel::fused) {
        detail::reorth_coefficients_fused(basis.data(), rows, ncols, r.data(), coeff.data());
        detail::reorth_subtract_fused(basis.data(), rows, ncols, coeff.data(), r.data());
    } else {
        detail::reorth_coefficients_loop(basis.data(), rows, ncols, r.data(), coeff.data());
        detail::reorth_subtract_loop(basis.data(), rows, ncols, coeff.data(), r.data());
    }
}

}  // namespace

double reorthogonalize(Vector& r, const Matrix& basis, Index ncols, const ReorthPolicy& policy) {
    validate_policy(policy);
    if (ncols < 0 || ncols > basis.cols())
        throw contract_error("reorthogonalize: ncols out of range");
    if (ncols > 0 && basis.rows() != r.size())
        throw contract_error("reorthogonalize: basis/residual size mismatch");
    if (ncols == 0) return r.norm();

    const double norm_before = r.norm();
    Vector coeff(ncols);
    run_pass(r, basis, ncols, policy.kernel, coeff);
    double norm_after = r.norm();
    for (int p = 1; p < policy.passes; ++p) {
        run_pass(r, basis, ncols, policy.kernel, coeff);
        norm_after = r.norm();
    }
    if (policy.passes == 1 && norm_after < policy.eta * norm_before) {
        run_pass(r, basis, ncols, policy.kernel, coeff);
        norm_after = r.norm();
    }
    return norm_after;
}

GKLState::GKLState(const LinearOperator& op, const Vector& p0) : op_(&op) {
    if (p0.size() != op.rows()) throw contract_error("starting vector has wrong size");
    require_finite(p0, "starting vector");
    const double beta1 = p0.norm();
    if (beta1 == 0.0) throw validation_error("starting vector is zero");
    u_ = Matrix(op.rows(), 8);
    v_ = Matrix(op.cols(), 8);
    u_.col(0) = p0 / beta1;
    nu_ = 1;
    betas_.push_back(beta1);
}

void GKLState::ensure_left_capacity(Index cols) {
    if (u_.cols() >= cols) return;
    Index cap = u_.cols();
    while (cap < cols) cap *= 2;
    u_.conservativeResize(Eigen::NoChange, std::min(cap, op_->rows()));
    if (u_.cols() < cols) u_.conservativeResize(Eigen::NoChange, cols);
}

void GKLState::ensure_right_capacity(Index cols) {
    if (v_.cols() >= cols) return;
    Index cap = v_.cols();
    while (cap < cols) cap *= 2;
    v_.conservativeResize(Eigen::NoChange, std::min(cap, op_->cols()));
    if (v_.cols() < cols) v_.conservativeResize(Eigen::NoChange, cols);
}

bool GKLState::step_v_side(const ReorthPolicy& policy) {
    const Index i = nv_ + 1;
    Vector r = op_->apply_adjoint(u_.col(nu_ - 1));
    norm_estimate_ = std::max(norm_estimate_, r.norm());
    if (i >= 2) r.noalias() -= betas_.back() * v_.col(nv_ - 1);
    const double alpha = reorthogonalize(r, v_, nv_, policy);
    if (alpha <= kBreakdownRel * norm_estimate_) {
        breakdown_ = Side::alpha;
        breakdown_step_ = i;
        return false;
    }
    ensure_right_capacity(nv_ + 1);
    alphas_.push_back(alpha);
    v_.col(nv_) = r / alpha;
    ++nv_;
    return true;
}

bool GKLState::step_u_side(const ReorthPolicy& policy) {
    const Index i = nv_;  // step whose u-side we are completing
    Vector p = op_->apply(v_.col(nv_ - 1));
    norm_estimate_ = std::max(norm_estimate_, p.norm());
    p.noalias() -= alphas_.back() * u_.col(nu_ - 1);
    const double beta = reorthogonalize(p, u_, nu_, policy);
    if (beta <= kBreakdownRel * norm_estimate_) {
        breakdown_ = Side::beta;
        breakdown_step_ = i;
        return false;
    }
    ensure_left_capacity(nu_ + 1);
    betas_.push_back(beta);
    u_.col(nu_) = p / beta;
    ++nu_;
    return true;
}

void GKLState::extend(Index k_target, const ReorthPolicy& policy) {
    validate_policy(policy);
    if (breakdown_ != Side::none) return;
    if (k_target > std::min(op_->rows(), op_->cols()))
        throw contract_error("extend: target exceeds min(rows, cols)");
    if (k_target < nv_) throw contract_error("extend: target behind current step");
    ensure_left_capacity(std::min(k_target + 1, op_->rows()));
    ensure_right_capacity(k_target);
    while (nv_ < k_target) {
        if (!step_v_side(policy)) return;
        if (!step_u_side(policy)) return;
    }
}

Matrix GKLState::assemble_bidiagonal() const {
    Matrix b = Matrix::Zero(nu_, nv_);
    for (Index j = 0; j < nv_; ++j) {
        b(j, j) = alphas_[static_cast<size_t>(j)];
        if (j + 1 < nu_) b(j + 1, j) = betas_[static_cast<size_t>(j) + 1];
    }
    return b;
}

void GKLState::restart_with_random_direction(Rng& rng, const ReorthPolicy& policy) {
    validate_policy(policy);
    if (breakdown_ == Side::none)
        throw contract_error("restart_with_random_direction: state is not broken down");

    if (breakdown_ == Side::alpha) {
        if (nv_ >= op_->cols())
            throw contract_error("restart_with_random_direction: right basis already complete");
        ensure_right_capacity(nv_ + 1);
        Vector w(op_->cols());
        for (;;) {
            w = rng.normal_vector(op_->cols());
            const double raw = w.norm();
            ReorthPolicy two = policy;
            two.passes = 2;
            const double left = reorthogonalize(w, v_, nv_, two);
            if (left > 0.1 * raw) {
                w /= left;
                break;
            }
        }
        alphas_.push_back(0.0);
        v_.col(nv_) = w;
        ++nv_;
        breakdown_ = Side::none;
        // Finish the interrupted step so the state sits at a step boundary
        // again; a fresh beta breakdown here simply leaves it broken down.
        step_u_side(policy);
    } else {
        if (nu_ >= op_->rows())
            throw contract_error("restart_with_random_direction: left basis already complete");
        ensure_left_capacity(nu_ + 1);
        Vector w(op_->rows());
        for (;;) {
            w = rng.normal_vector(op_->rows());
            const double raw = w.norm();
            ReorthPolicy two = policy;
            two.passes = 2;
            const double left = reorthogonalize(w, u_, nu_, two);
            if (left > 0.1 * raw) {
                w /= left;
                break;
            }
        }
        betas_.push_back(0.0);
        u_.col(nu_) = w;
        ++nu_;
        breakdown_ = Side::none;
    }
}

}  // namespace psvd
