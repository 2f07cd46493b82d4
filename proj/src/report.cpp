#include "psvd/report.hpp"

#include <chrono>
#include <cmath>

namespace psvd {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

}  // namespace

nlohmann::json to_json(const RunReport& report) {
    return nlohmann::json{
        {"label", report.label},
        {"singular_values", report.singular_values},
        {"iterations", report.iterations},
        {"matvecs", report.matvecs},
        {"wall_time_ms", report.wall_time_ms},
        {"flags",
         {{"truncated", report.flags.truncated}, {"unconverged", report.flags.unconverged}}},
    };
}

nlohmann::json make_report_document(const std::string& command, const nlohmann::json& inputs,
                                    const std::vector<RunReport>& reports) {
    nlohmann::json rep = nlohmann::json::array();
    for (const auto& r : reports) rep.push_back(to_json(r));
    return nlohmann::json{
        {"schema", "psvd-report/1"},
        {"command", command},
        {"inputs", inputs},
        {"reports", rep},
    };
}

Matrix planted_spectrum_matrix(Index rows, Index cols, const Vector& spectrum, Rng& rng) {
    const Index r = spectrum.size();
    if (r < 1 || r > std::min(rows, cols))
        throw contract_error("planted spectrum length out of range");
    for (Index i = 0; i < r; ++i) {
        if (spectrum[i] < 0.0) throw contract_error("planted spectrum must be non-negative");
        if (i > 0 && spectrum[i] > spectrum[i - 1])
            throw contract_error("planted spectrum must be sorted descending");
    }
    Matrix q1 = orthonormalize_block(rng.normal_matrix(rows, r), rng).q;
    Matrix q2 = orthonormalize_block(rng.normal_matrix(cols, r), rng).q;
    return q1 * spectrum.asDiagonal() * q2.transpose();
}

ReorthBenchResult run_bench_reorth(Index rows, Index cols, Index k, std::uint64_t seed) {
    if (rows < 1 || cols < 1) throw contract_error("bench reorth: empty matrix");
    if (k < 1 || k > std::min(rows, cols)) throw contract_error("bench reorth: bad step count");

    Rng data_rng(seed);
    DenseOperator op(data_rng.normal_matrix(rows, cols));
    const Vector p0 = data_rng.unit_vector(rows);

    ReorthBenchResult out;
    GKLState fused_state(op, p0);
    GKLState loop_state(op, p0);

    auto run = [&](GKLState& state, ReorthPolicy::Kernel kernel, RunReport& rep,
                   const char* label) {
        ReorthPolicy policy;
        policy.kernel = kernel;
        op.reset_matvec_count();
        const auto t0 = std::chrono::steady_clock::now();
        state.extend(k, policy);
        rep.wall_time_ms = ms_since(t0);
        rep.label = label;
        rep.iterations = state.right_count();
        rep.matvecs = op.matvec_count();
        SvdResult svd = svd_dense(state.assemble_bidiagonal());
        rep.singular_values.assign(svd.s.data(), svd.s.data() + svd.s.size());
    };
    run(fused_state, ReorthPolicy::Kernel::fused, out.fused, "reorth-fused");
    run(loop_state, ReorthPolicy::Kernel::vector_loop, out.loop, "reorth-loop");

    double diff = 0.0;
    if (fused_state.alphas().size() != loop_state.alphas().size() ||
        fused_state.betas().size() != loop_state.betas().size())
        throw std::logic_error("reorth kernels took different step counts");
    for (size_t i = 0; i < fused_state.alphas().size(); ++i)
        diff = std::max(diff, std::abs(fused_state.alphas()[i] - loop_state.alphas()[i]));
    for (size_t i = 0; i < fused_state.betas().size(); ++i)
        diff = std::max(diff, std::abs(fused_state.betas()[i] - loop_state.betas()[i]));
    out.max_difference = diff;
    if (diff > 1e-13)
        throw std::logic_error("reorth kernel modes disagree beyond 1e-13: " +
                               std::to_string(diff));
    out.ratio = out.loop.wall_time_ms > 0.0 ? out.fused.wall_time_ms / out.loop.wall_time_ms : 1.0;
    return out;
}

WarmBenchResult run_bench_warmstart(Index rows, Index cols, Index k, Index sequence_length,
                                    double drift, std::uint64_t seed) {
    if (rows < 1 || cols < 1) throw contract_error("bench warmstart: empty matrix");
    const Index minmn = std::min(rows, cols);
    if (k < 1 || k > minmn) throw contract_error("bench warmstart: k out of range");
    if (sequence_length < 1) throw contract_error("bench warmstart: sequence must have a matrix");
    if (drift < 0.0) throw contract_error("bench warmstart: drift must be non-negative");

    // A fixed base matrix with a planted geometric spectrum plus a slowly
    // growing additive perturbation: step t solves A_t = A + (t/T) * drift * E
    // with E a fixed Gaussian matrix scaled to ||E||_F = ||A||_F, so `drift`
    // reads directly as the relative perturbation reached at the end of the
    // sequence. The planted rank deliberately exceeds what one restart pass
    // can span (steps * k columns), so convergence takes genuinely iterative
    // work and a good starting subspace can save whole passes.
    const Index r = std::min<Index>(minmn, 3 * k + 16);
    Vector spectrum(r);
    for (Index i = 0; i < r; ++i) spectrum[i] = std::pow(0.7, static_cast<double>(i));

    Rng rng(seed);
    const Matrix base = planted_spectrum_matrix(rows, cols, spectrum, rng);
    Matrix bump = rng.normal_matrix(rows, cols);
    bump *= base.norm() / bump.norm();

    WarmBenchResult out;
    out.sequence_length = sequence_length;
    out.warm.label = "warmstart-warm";
    out.cold.label = "warmstart-cold";

    BlwsOptions opts;
    opts.seed = seed;
    std::optional<WarmState> carry;

    for (Index t = 0; t < sequence_length; ++t) {
        const double step = static_cast<double>(t) / static_cast<double>(sequence_length);
        DenseOperator op(base + (step * drift) * bump);

        {
            const auto t0 = std::chrono::steady_clock::now();
            BlSvdResult res = bl_svd(op, k, carry, opts);
            out.warm.wall_time_ms += ms_since(t0);
            carry = res.warm;
            out.warm.iterations += res.restarts;
            out.warm.matvecs += res.svd.matvec_count;
            out.warm.flags.unconverged |= res.svd.flags.unconverged;
            if (t + 1 == sequence_length)
                out.warm.singular_values.assign(res.svd.s.data(),
                                                res.svd.s.data() + res.svd.s.size());
        }
        {
            const auto t0 = std::chrono::steady_clock::now();
            BlSvdResult res = bl_svd(op, k, std::nullopt, opts);
            out.cold.wall_time_ms += ms_since(t0);
            out.cold.iterations += res.restarts;
            out.cold.matvecs += res.svd.matvec_count;
            out.cold.flags.unconverged |= res.svd.flags.unconverged;
            if (t + 1 == sequence_length)
                out.cold.singular_values.assign(res.svd.s.data(),
                                                res.svd.s.data() + res.svd.s.size());
        }
    }
    return out;
}

}  // namespace psvd
