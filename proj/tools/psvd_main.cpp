#include "psvd/matrix_market.hpp"
#include "psvd/report.hpp"
#include "psvd/rpca.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

using psvd::Index;
using psvd::Matrix;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitParse = 3;
constexpr int kExitStrict = 4;

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

// Seed precedence: --seed flag, then PSVD_SEED, then 42.
std::uint64_t default_seed() {
    if (const char* env = std::getenv("PSVD_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw psvd::validation_error("PSVD_SEED is not a valid unsigned integer");
        }
    }
    return 42;
}

void emit(const nlohmann::json& doc, const std::string& out_path) {
    if (out_path.empty()) return;
    if (out_path == "-") {
        std::cout << doc.dump(2) << "\n";
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw psvd::validation_error("cannot open '" + out_path + "' for writing");
    out << doc.dump(2) << "\n";
}

void print_summary(const psvd::RunReport& rep) {
    std::cout << rep.label << ": " << rep.singular_values.size() << " values";
    if (!rep.singular_values.empty()) {
        std::cout << " [";
        const size_t show = std::min<size_t>(rep.singular_values.size(), 8);
        for (size_t i = 0; i < show; ++i) {
            if (i) std::cout << ", ";
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.10g", rep.singular_values[i]);
            std::cout << buf;
        }
        if (rep.singular_values.size() > show) std::cout << ", ...";
        std::cout << "]";
    }
    std::cout << ", iterations " << rep.iterations << ", matvecs " << rep.matvecs;
    char tbuf[32];
    std::snprintf(tbuf, sizeof(tbuf), "%.2f", rep.wall_time_ms);
    std::cout << ", " << tbuf << " ms";
    if (rep.flags.truncated) std::cout << " [truncated]";
    if (rep.flags.unconverged) std::cout << " [unconverged]";
    std::cout << "\n";
}

int finish(const std::string& command, const nlohmann::json& inputs,
           const std::vector<psvd::RunReport>& reports, const std::string& out_path,
           bool strict) {
    for (const auto& r : reports) print_summary(r);
    emit(psvd::make_report_document(command, inputs, reports), out_path);
    if (strict) {
        for (const auto& r : reports) {
            if (r.flags.truncated || r.flags.unconverged) {
                std::cerr << "strict mode: run '" << r.label << "' did not fully converge\n";
                return kExitStrict;
            }
        }
    }
    return kExitOk;
}

std::vector<double> values_of(const psvd::Vector& s) {
    return std::vector<double>(s.data(), s.data() + s.size());
}

struct CommonArgs {
    std::string input;
    std::string out;
    std::string label;
    double tol = 1e-8;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool strict = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, double default_tol) {
    args.tol = default_tol;
    cmd->add_option("--input,-i", args.input, "input matrix (MatrixMarket file)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out,-o", args.out, "write the JSON report here ('-' for stdout)");
    cmd->add_option("--label", args.label, "label for the report entry");
    cmd->add_option("--tol", args.tol, "convergence tolerance");
    cmd->add_option("--seed", args.seed, "random seed (overrides PSVD_SEED)")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_flag("--strict", args.strict, "exit 4 if any run is truncated or unconverged");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"partial SVD toolkit: threshold-driven and top-k singular triplets,\n"
                 "warm-started block solvers, singular value thresholding and robust PCA"};
    app.require_subcommand(1);

    // ---- topk ----
    auto* topk = app.add_subcommand("topk", "k largest singular triplets");
    CommonArgs topk_args;
    Index topk_k = 0;
    Index topk_max_k = 0;
    add_common(topk, topk_args, 1e-8);
    topk->add_option("--k,-k", topk_k, "number of triplets")->required()->check(CLI::PositiveNumber);
    topk->add_option("--max-k", topk_max_k, "subspace size cap (0: min(rows, cols))");

    // ---- threshold ----
    auto* thr = app.add_subcommand("threshold", "all triplets above a singular value threshold");
    CommonArgs thr_args;
    double thr_value = -1.0;
    Index thr_k0 = 16;
    Index thr_max_k = 0;
    add_common(thr, thr_args, 1e-8);
    thr->add_option("--thr,-t", thr_value, "singular value threshold")->required();
    thr->add_option("--k0", thr_k0, "starting subspace size")->check(CLI::PositiveNumber);
    thr->add_option("--max-k", thr_max_k, "subspace size cap (0: min(rows, cols))");

    // ---- rpca ----
    auto* rpca = app.add_subcommand("rpca", "robust PCA: split into low-rank plus sparse");
    CommonArgs rpca_args;
    std::string rpca_lambda = "auto";
    Index rpca_max_iter = 500;
    std::string rpca_backend = "threshold";
    std::string out_lowrank, out_sparse;
    add_common(rpca, rpca_args, 1e-7);
    rpca->add_option("--lambda", rpca_lambda,
                     "sparsity weight: 'auto' (1/sqrt(max(rows, cols))) or a positive number");
    rpca->add_option("--max-iter", rpca_max_iter, "iteration cap")->check(CLI::PositiveNumber);
    rpca->add_option("--backend", rpca_backend, "SVT engine: threshold or blws")
        ->check(CLI::IsMember({"threshold", "blws"}));
    rpca->add_option("--out-lowrank", out_lowrank, "write the low-rank part (MatrixMarket)");
    rpca->add_option("--out-sparse", out_sparse, "write the sparse part (MatrixMarket)");

    // ---- bench ----
    auto* bench = app.add_subcommand("bench", "benchmark harnesses");
    bench->require_subcommand(1);

    auto* b_reorth = bench->add_subcommand("reorth", "compare the reorthogonalization kernels");
    Index br_rows = 1000, br_cols = 1000, br_k = 100;
    std::uint64_t br_seed = 0;
    bool br_seed_set = false;
    std::string br_out;
    b_reorth->add_option("--rows", br_rows, "matrix rows")->check(CLI::PositiveNumber);
    b_reorth->add_option("--cols", br_cols, "matrix columns")->check(CLI::PositiveNumber);
    b_reorth->add_option("--k", br_k, "bidiagonalization steps")->check(CLI::PositiveNumber);
    b_reorth->add_option("--seed", br_seed, "random seed")
        ->each([&br_seed_set](const std::string&) { br_seed_set = true; });
    b_reorth->add_option("--out,-o", br_out, "write the JSON report here ('-' for stdout)");

    auto* b_warm = bench->add_subcommand("warmstart", "warm vs cold block solves on a drifting sequence");
    Index bw_rows = 200, bw_cols = 200, bw_k = 5, bw_seq = 20;
    double bw_drift = 0.01;
    std::uint64_t bw_seed = 0;
    bool bw_seed_set = false;
    std::string bw_out;
    b_warm->add_option("--rows", bw_rows, "matrix rows")->check(CLI::PositiveNumber);
    b_warm->add_option("--cols", bw_cols, "matrix columns")->check(CLI::PositiveNumber);
    b_warm->add_option("--k", bw_k, "triplets per solve")->check(CLI::PositiveNumber);
    b_warm->add_option("--sequence", bw_seq, "number of matrices in the drift sequence")
        ->check(CLI::PositiveNumber);
    b_warm->add_option("--drift", bw_drift, "relative factor drift per step");
    b_warm->add_option("--seed", bw_seed, "random seed")
        ->each([&bw_seed_set](const std::string&) { bw_seed_set = true; });
    b_warm->add_option("--out,-o", bw_out, "write the JSON report here ('-' for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
            e.get_name() == "CallForVersion")
            return app.exit(e);
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (topk->parsed()) {
            const std::uint64_t seed = topk_args.seed_set ? topk_args.seed : default_seed();
            Matrix a = psvd::read_matrix_market(topk_args.input);
            psvd::DenseOperator op(std::move(a));
            psvd::ThresholdOptions opts;
            opts.tol = topk_args.tol;
            opts.seed = seed;
            opts.max_k = topk_max_k;
            const auto t0 = std::chrono::steady_clock::now();
            psvd::PartialSVD res = psvd::svd_top_k(op, topk_k, opts);
            psvd::RunReport rep;
            rep.label = topk_args.label.empty() ? "topk" : topk_args.label;
            rep.singular_values = values_of(res.s);
            rep.iterations = res.work_size;
            rep.matvecs = res.matvec_count;
            rep.wall_time_ms = ms_since(t0);
            rep.flags = res.flags;
            nlohmann::json inputs{{"path", topk_args.input},
                                  {"rows", op.rows()},
                                  {"cols", op.cols()},
                                  {"k", topk_k},
                                  {"tol", topk_args.tol},
                                  {"seed", seed}};
            return finish("topk", inputs, {rep}, topk_args.out, topk_args.strict);
        }

        if (thr->parsed()) {
            const std::uint64_t seed = thr_args.seed_set ? thr_args.seed : default_seed();
            Matrix a = psvd::read_matrix_market(thr_args.input);
            psvd::DenseOperator op(std::move(a));
            psvd::ThresholdOptions opts;
            opts.tol = thr_args.tol;
            opts.seed = seed;
            opts.initial_k = thr_k0;
            opts.max_k = thr_max_k;
            const auto t0 = std::chrono::steady_clock::now();
            psvd::PartialSVD res = psvd::svd_above_threshold(op, thr_value, opts);
            psvd::RunReport rep;
            rep.label = thr_args.label.empty() ? "threshold" : thr_args.label;
            rep.singular_values = values_of(res.s);
            rep.iterations = res.work_size;
            rep.matvecs = res.matvec_count;
            rep.wall_time_ms = ms_since(t0);
            rep.flags = res.flags;
            nlohmann::json inputs{{"path", thr_args.input},
                                  {"rows", op.rows()},
                                  {"cols", op.cols()},
                                  {"thr", thr_value},
                                  {"k0", thr_k0},
                                  {"tol", thr_args.tol},
                                  {"seed", seed}};
            return finish("threshold", inputs, {rep}, thr_args.out, thr_args.strict);
        }

        if (rpca->parsed()) {
            const std::uint64_t seed = rpca_args.seed_set ? rpca_args.seed : default_seed();
            double lambda = 0.0;  // 0 lets the solver pick 1/sqrt(max(rows, cols))
            if (rpca_lambda != "auto") {
                try {
                    size_t used = 0;
                    lambda = std::stod(rpca_lambda, &used);
                    if (used != rpca_lambda.size()) throw std::invalid_argument(rpca_lambda);
                } catch (const std::exception&) {
                    throw psvd::validation_error("--lambda must be 'auto' or a number, got '" +
                                                 rpca_lambda + "'");
                }
                if (!(lambda > 0.0))
                    throw psvd::validation_error("--lambda must be positive when numeric");
            }
            Matrix d = psvd::read_matrix_market(rpca_args.input);
            psvd::RpcaOptions opts;
            opts.lambda = lambda;
            opts.tol = rpca_args.tol;
            opts.max_iter = rpca_max_iter;
            opts.seed = seed;
            opts.backend =
                rpca_backend == "blws" ? psvd::SvtBackend::blws : psvd::SvtBackend::threshold;
            const auto t0 = std::chrono::steady_clock::now();
            psvd::RpcaResult res = psvd::rpca_ialm(d, opts);
            psvd::RunReport rep;
            rep.label = rpca_args.label.empty() ? "rpca" : rpca_args.label;
            rep.wall_time_ms = ms_since(t0);
            rep.iterations = res.iterations;
            rep.matvecs = res.matvec_count;
            rep.flags.unconverged = !res.converged;
            // Report the spectrum of the recovered low-rank part (nonzero part
            // only; exact zeros carry no information).
            if (std::min(res.l.rows(), res.l.cols()) <= 400) {
                psvd::SvdResult lsvd = psvd::svd_dense(res.l);
                for (Index i = 0; i < lsvd.s.size(); ++i) {
                    if (lsvd.s[i] > 1e-12 * std::max(1.0, lsvd.s[0]))
                        rep.singular_values.push_back(lsvd.s[i]);
                }
            }
            if (!out_lowrank.empty()) psvd::write_matrix_market(out_lowrank, res.l);
            if (!out_sparse.empty()) psvd::write_matrix_market(out_sparse, res.e);
            const double lambda_used =
                lambda > 0.0 ? lambda
                             : 1.0 / std::sqrt(static_cast<double>(std::max(d.rows(), d.cols())));
            nlohmann::json inputs{{"path", rpca_args.input},
                                  {"rows", d.rows()},
                                  {"cols", d.cols()},
                                  {"lambda", lambda_used},
                                  {"tol", rpca_args.tol},
                                  {"max_iter", rpca_max_iter},
                                  {"backend", rpca_backend},
                                  {"seed", seed}};
            const double final_residual =
                res.history.empty() ? 0.0 : res.history.back().rel_residual;
            std::cout << "rpca: rank " << (res.history.empty() ? 0 : res.history.back().rank)
                      << ", sparsity " << (res.history.empty() ? 0 : res.history.back().sparsity)
                      << ", relative residual " << final_residual << "\n";
            return finish("rpca", inputs, {rep}, rpca_args.out, rpca_args.strict);
        }

        if (b_reorth->parsed()) {
            const std::uint64_t seed = br_seed_set ? br_seed : default_seed();
            psvd::ReorthBenchResult res = psvd::run_bench_reorth(br_rows, br_cols, br_k, seed);
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.3f", res.ratio);
            std::cout << "fused/loop time ratio: " << buf
                      << " (max coefficient difference " << res.max_difference << ")\n";
            nlohmann::json inputs{{"rows", br_rows},
                                  {"cols", br_cols},
                                  {"k", br_k},
                                  {"seed", seed},
                                  {"ratio", res.ratio},
                                  {"speedup", res.ratio > 0.0 ? 1.0 / res.ratio : 0.0},
                                  {"max_difference", res.max_difference}};
            return finish("bench-reorth", inputs, {res.fused, res.loop}, br_out, false);
        }

        if (b_warm->parsed()) {
            const std::uint64_t seed = bw_seed_set ? bw_seed : default_seed();
            psvd::WarmBenchResult res =
                psvd::run_bench_warmstart(bw_rows, bw_cols, bw_k, bw_seq, bw_drift, seed);
            std::cout << "warm matvecs " << res.warm.matvecs << " vs cold " << res.cold.matvecs
                      << " over " << res.sequence_length << " solves\n";
            nlohmann::json inputs{{"rows", bw_rows}, {"cols", bw_cols},   {"k", bw_k},
                                  {"sequence", bw_seq}, {"drift", bw_drift}, {"seed", seed}};
            return finish("bench-warmstart", inputs, {res.warm, res.cold}, bw_out, false);
        }
    } catch (const psvd::parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const psvd::contract_error& e) {
        std::cerr << "invalid request: " << e.what() << "\n";
        return kExitValidation;
    } catch (const psvd::validation_error& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitValidation;  // no subcommand matched (unreachable)
}
