#include "psvd/matrix_market.hpp"

#include "psvd/core.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

using namespace psvd;
using nlohmann::json;

namespace {

// End-to-end tests drive the installed binary; the build exports its path.
std::string cli_path() {
    const char* bin = std::getenv("PSVD_CLI_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "PSVD_CLI_BIN must point at the command-line binary");
    return bin;
}

struct RunResult {
    int exit_code = -1;
    std::string stdout_text;
};

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    static int counter = 0;
    const std::string out_path =
        "/tmp/psvd_cli_test_" + std::to_string(getpid()) + "_" + std::to_string(counter++) + ".out";
    const std::string cmd =
        env_prefix + " " + cli_path() + " " + args + " > " + out_path + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult res;
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_path);
    std::stringstream buf;
    buf << in.rdbuf();
    res.stdout_text = buf.str();
    std::remove(out_path.c_str());
    return res;
}

std::string write_diag(const std::string& name) {
    Matrix d = Matrix::Zero(3, 3);
    d(0, 0) = 5.0;
    d(1, 1) = 3.0;
    d(2, 2) = 1.0;
    const std::string path = "/tmp/" + name + "_" + std::to_string(getpid()) + ".mtx";
    write_matrix_market(path, d);
    return path;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return json::parse(in);
}

/// Strips the only field allowed to differ between identical-seed runs.
void drop_times(json& doc) {
    for (auto& rep : doc["reports"]) rep.erase("wall_time_ms");
}

}  // namespace

TEST_CASE("cli computes and reports the diagonal example") {
    const std::string mtx = write_diag("cli_diag");
    const std::string out = mtx + ".json";

    SUBCASE("topk") {
        RunResult res = run_cli("topk --input " + mtx + " --k 2 --out " + out);
        CHECK(res.exit_code == 0);
        json doc = load_json(out);
        CHECK(doc["schema"] == "psvd-report/1");
        CHECK(doc["command"] == "topk");
        REQUIRE(doc["reports"].size() == 1);
        auto vals = doc["reports"][0]["singular_values"];
        REQUIRE(vals.size() == 2);
        CHECK(std::abs(vals[0].get<double>() - 5.0) <= 1e-8);
        CHECK(std::abs(vals[1].get<double>() - 3.0) <= 1e-8);
        for (const char* key : {"label", "singular_values", "iterations", "matvecs",
                                "wall_time_ms", "flags"})
            CHECK(doc["reports"][0].contains(key));
    }
    SUBCASE("threshold") {
        RunResult res = run_cli("threshold --input " + mtx + " --thr 2 --out " + out);
        CHECK(res.exit_code == 0);
        json doc = load_json(out);
        CHECK(doc["inputs"]["thr"] == 2.0);
        REQUIRE(doc["reports"][0]["singular_values"].size() == 2);
    }
    SUBCASE("rpca") {
        RunResult res = run_cli("rpca --input " + mtx + " --lambda auto --out " + out);
        CHECK(res.exit_code == 0);
        CHECK(res.stdout_text.find("rank") != std::string::npos);
    }
    SUBCASE("rpca writes its factors") {
        const std::string lpath = mtx + ".low";
        const std::string spath = mtx + ".sparse";
        RunResult res = run_cli("rpca --input " + mtx + " --out-lowrank " + lpath +
                                " --out-sparse " + spath);
        CHECK(res.exit_code == 0);
        Matrix l = read_matrix_market(lpath);
        Matrix e = read_matrix_market(spath);
        Matrix d = read_matrix_market(mtx);
        CHECK((d - l - e).norm() <= 1e-6 * d.norm());
        std::remove(lpath.c_str());
        std::remove(spath.c_str());
    }
    std::remove(mtx.c_str());
    std::remove(out.c_str());
}

TEST_CASE("cli exit codes") {
    const std::string mtx = write_diag("cli_codes");

    SUBCASE("missing required flag") {
        CHECK(run_cli("topk --input " + mtx).exit_code == 2);
    }
    SUBCASE("unknown subcommand") {
        CHECK(run_cli("frobnicate").exit_code == 2);
    }
    SUBCASE("nonexistent input file") {
        CHECK(run_cli("topk --input /tmp/psvd-does-not-exist.mtx --k 1").exit_code == 2);
    }
    SUBCASE("malformed matrix file") {
        const std::string bad = "/tmp/psvd_bad_" + std::to_string(getpid()) + ".mtx";
        std::ofstream(bad) << "%%MatrixMarket matrix array real general\n2 2\n1\n";
        CHECK(run_cli("topk --input " + bad + " --k 1").exit_code == 3);
        std::remove(bad.c_str());
    }
    SUBCASE("k beyond the matrix dimension") {
        CHECK(run_cli("topk --input " + mtx + " --k 9").exit_code == 2);
    }
    SUBCASE("invalid lambda") {
        CHECK(run_cli("rpca --input " + mtx + " --lambda nope").exit_code == 2);
    }
    SUBCASE("strict mode surfaces truncation") {
        CHECK(run_cli("threshold --input " + mtx + " --thr 0.5 --max-k 1 --strict").exit_code == 4);
        // Without --strict the same run succeeds with a flag.
        CHECK(run_cli("threshold --input " + mtx + " --thr 0.5 --max-k 1").exit_code == 0);
    }
    SUBCASE("help exits cleanly") {
        CHECK(run_cli("--help").exit_code == 0);
    }
    std::remove(mtx.c_str());
}

TEST_CASE("cli runs are reproducible and seed-controlled") {
    const std::string mtx = write_diag("cli_seed");
    const std::string out1 = mtx + ".1.json";
    const std::string out2 = mtx + ".2.json";

    SUBCASE("same seed, identical numerical output") {
        REQUIRE(run_cli("topk --input " + mtx + " --k 2 --seed 7 --out " + out1).exit_code == 0);
        REQUIRE(run_cli("topk --input " + mtx + " --k 2 --seed 7 --out " + out2).exit_code == 0);
        json a = load_json(out1);
        json b = load_json(out2);
        drop_times(a);
        drop_times(b);
        CHECK(a == b);
    }
    SUBCASE("seed environment variable is honored and the flag wins") {
        REQUIRE(run_cli("topk --input " + mtx + " --k 1 --out " + out1,
                        "PSVD_SEED=99").exit_code == 0);
        CHECK(load_json(out1)["inputs"]["seed"] == 99);
        REQUIRE(run_cli("topk --input " + mtx + " --k 1 --seed 5 --out " + out2,
                        "PSVD_SEED=99").exit_code == 0);
        CHECK(load_json(out2)["inputs"]["seed"] == 5);
        CHECK(run_cli("topk --input " + mtx + " --k 1", "PSVD_SEED=notanumber").exit_code == 2);
    }
    std::remove(mtx.c_str());
    std::remove(out1.c_str());
    std::remove(out2.c_str());
}

TEST_CASE("bench subcommands emit well-formed reports") {
    const std::string out = "/tmp/psvd_bench_" + std::to_string(getpid()) + ".json";

    SUBCASE("reorth smoke") {
        RunResult res = run_cli("bench reorth --rows 50 --cols 50 --k 10 --out " + out);
        CHECK(res.exit_code == 0);
        CHECK(res.stdout_text.find("ratio") != std::string::npos);
        json doc = load_json(out);
        CHECK(doc["command"] == "bench-reorth");
        CHECK(doc["reports"].size() == 2);
        CHECK(doc["inputs"]["max_difference"].get<double>() <= 1e-13);
    }
    SUBCASE("reorth is deterministic for a fixed seed") {
        const std::string out2 = out + ".2";
        REQUIRE(run_cli("bench reorth --rows 50 --cols 50 --k 10 --seed 4 --out " + out).exit_code ==
                0);
        REQUIRE(run_cli("bench reorth --rows 50 --cols 50 --k 10 --seed 4 --out " + out2)
                    .exit_code == 0);
        json a = load_json(out);
        json b = load_json(out2);
        // Everything numerical except timing-derived fields must match bitwise.
        CHECK(a["reports"][0]["singular_values"] == b["reports"][0]["singular_values"]);
        CHECK(a["reports"][1]["singular_values"] == b["reports"][1]["singular_values"]);
        CHECK(a["inputs"]["max_difference"] == b["inputs"]["max_difference"]);
        std::remove(out2.c_str());
    }
    SUBCASE("warmstart smoke") {
        RunResult res =
            run_cli("bench warmstart --rows 40 --cols 30 --k 2 --sequence 2 --drift 0.01 --out " +
                    out);
        CHECK(res.exit_code == 0);
        json doc = load_json(out);
        CHECK(doc["command"] == "bench-warmstart");
        CHECK(doc["reports"].size() == 2);
    }
    std::remove(out.c_str());
}

namespace {

// Minimal checker for the subset of JSON Schema draft-07 the shipped schema
// uses: type, const, enum, required, properties, items, minimum, minItems.
// Returns the first violation found, or an empty string.
std::string schema_errors(const json& schema, const json& value, const std::string& where) {
    if (schema.contains("const") && value != schema["const"])
        return where + ": expected constant " + schema["const"].dump();
    if (schema.contains("enum")) {
        bool hit = false;
        for (const auto& cand : schema["enum"]) hit = hit || value == cand;
        if (!hit) return where + ": value " + value.dump() + " not in enum";
    }
    if (schema.contains("type")) {
        const std::string t = schema["type"].get<std::string>();
        const bool ok = (t == "object" && value.is_object()) ||
                        (t == "array" && value.is_array()) ||
                        (t == "string" && value.is_string()) ||
                        (t == "integer" && value.is_number_integer()) ||
                        (t == "number" && value.is_number()) ||
                        (t == "boolean" && value.is_boolean());
        if (!ok) return where + ": expected type " + t + ", got " + value.dump();
    }
    if (schema.contains("minimum") && value.is_number() &&
        value.get<double>() < schema["minimum"].get<double>())
        return where + ": " + value.dump() + " below minimum";
    if (schema.contains("required"))
        for (const auto& key : schema["required"])
            if (!value.contains(key.get<std::string>()))
                return where + ": missing required key " + key.get<std::string>();
    if (schema.contains("properties") && value.is_object())
        for (auto it = schema["properties"].begin(); it != schema["properties"].end(); ++it)
            if (value.contains(it.key())) {
                std::string err =
                    schema_errors(it.value(), value[it.key()], where + "." + it.key());
                if (!err.empty()) return err;
            }
    if (schema.contains("minItems") && value.is_array() &&
        value.size() < schema["minItems"].get<std::size_t>())
        return where + ": fewer than minItems entries";
    if (schema.contains("items") && value.is_array())
        for (std::size_t i = 0; i < value.size(); ++i) {
            std::string err =
                schema_errors(schema["items"], value[i], where + "[" + std::to_string(i) + "]");
            if (!err.empty()) return err;
        }
    return "";
}

std::string locate_schema() {
    if (const char* env = std::getenv("PSVD_SCHEMA_PATH")) return env;
    for (const char* cand :
         {"schemas/psvd-report-1.schema.json", "../schemas/psvd-report-1.schema.json"}) {
        std::ifstream probe(cand);
        if (probe.good()) return cand;
    }
    return "";
}

}  // namespace

TEST_CASE("every subcommand's report validates against the shipped schema") {
    const std::string spath = locate_schema();
    REQUIRE_MESSAGE(!spath.empty(),
                    "schema file not found; set PSVD_SCHEMA_PATH or run from the source root");
    const json schema = load_json(spath);

    const std::string mtx = write_diag("cli_schema");
    const std::string out = mtx + ".json";
    const std::vector<std::string> invocations = {
        "topk --input " + mtx + " --k 2 --out " + out,
        "threshold --input " + mtx + " --thr 2 --out " + out,
        "rpca --input " + mtx + " --out " + out,
        "bench reorth --rows 30 --cols 20 --k 5 --out " + out,
        "bench warmstart --rows 25 --cols 20 --k 3 --sequence 3 --out " + out,
    };
    for (const auto& args : invocations) {
        CAPTURE(args);
        REQUIRE(run_cli(args).exit_code == 0);
        const json doc = load_json(out);
        const std::string err = schema_errors(schema, doc, "$");
        CHECK_MESSAGE(err.empty(), err);
    }
    std::remove(mtx.c_str());
    std::remove(out.c_str());
}
