#pragma once

#include "psvd/blws.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace psvd {

/// One labelled solver run inside a report document.
struct RunReport {
    std::string label;
    std::vector<double> singular_values;
    Index iterations = 0;
    std::uint64_t matvecs = 0;
    double wall_time_ms = 0.0;
    SolveFlags flags;
};

nlohmann::json to_json(const RunReport& report);

/// Assembles the full "psvd-report/1" document.
nlohmann::json make_report_document(const std::string& command, const nlohmann::json& inputs,
                                    const std::vector<RunReport>& reports);

/// Random matrix with a prescribed singular spectrum: two random orthonormal
/// factors around diag(spectrum). spectrum must be non-negative and sorted
/// descending; its length may not exceed min(rows, cols).
Matrix planted_spectrum_matrix(Index rows, Index cols, const Vector& spectrum, Rng& rng);

/// Timing comparison of the two reorthogonalization kernels: one seeded
/// random matrix, one starting vector, `k` bidiagonalization steps under
/// each kernel. The coefficient recurrences must come out bit-identical
/// (max_difference is checked against 1e-13 and a violation throws — the
/// kernels disagreeing means a broken build).
struct ReorthBenchResult {
    RunReport fused;
    RunReport loop;
    double ratio = 0.0;           ///< fused wall time / loop wall time
    double max_difference = 0.0;  ///< across all alphas and betas
};

ReorthBenchResult run_bench_reorth(Index rows, Index cols, Index k, std::uint64_t seed);

/// Warm-start benchmark: a drifting sequence A_t = A + (t/T) * drift * E with
/// a fixed planted-spectrum A and a fixed Gaussian E scaled to ||E||_F =
/// ||A||_F, solved for the top k triplets twice per step — once carrying the
/// warm subspace forward, once restarting cold. Reports total restarts,
/// matvecs, and wall time per strategy.
struct WarmBenchResult {
    RunReport warm;
    RunReport cold;
    Index sequence_length = 0;
};

WarmBenchResult run_bench_warmstart(Index rows, Index cols, Index k, Index sequence_length,
                                    double drift, std::uint64_t seed);

}  // namespace psvd
