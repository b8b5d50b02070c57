#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fraclab/cli.hpp"
#include "fraclab/report_io.hpp"

using namespace fraclab;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct CaptureStdout {
    std::ostringstream buffer;
    std::streambuf* saved;
    CaptureStdout() : saved(std::cout.rdbuf(buffer.rdbuf())) {}
    ~CaptureStdout() { std::cout.rdbuf(saved); }
};

int run_cli(const std::vector<std::string>& args) { return fraclab::cli::run(args); }

}  // namespace

TEST_CASE("number format is 17 significant digits") {
    CHECK(format_number(1.0 / 3.0) == "0.33333333333333331");
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(0.25) == "0.25");
}

TEST_CASE("sweep subcommand writes stable CSV artifacts") {
    const std::string out = "cli_sweep_test.csv";
    const std::vector<std::string> args = {
        "sweep", "--bc", "dirichlet", "--s", "0.5", "--p", "2",    "--cells", "256",
        "--weight", "sin:base=2,amp=1",  "--eps", "1/4:1/16",      "--k",     "3",
        "--out", out};
    CaptureStdout cap;
    REQUIRE(run_cli(args) == cli::kExitOk);
    const std::string body1 = slurp(out);
    CHECK(body1.rfind("variant,s,p,k,eps,lambda_eps,lambda_limit,error\n", 0) == 0);
    CHECK(body1.find("\r") == std::string::npos);  // LF only
    CHECK(body1.find("dirichlet,0.5,2,1,0.25,") != std::string::npos);

    // byte-identical on re-run with the same seed
    REQUIRE(run_cli(args) == cli::kExitOk);
    CHECK(slurp(out) == body1);

    // JSON and manifest artifacts
    REQUIRE(run_cli({"sweep", "--bc", "dirichlet", "--s", "0.5", "--cells", "256", "--weight",
                     "sin:base=2,amp=1", "--eps", "1/4:1/16", "--k", "2", "--out", out,
                     "--json-out", "cli_sweep_test.json"}) == cli::kExitOk);
    const auto j = nlohmann::json::parse(slurp("cli_sweep_test.json"));
    CHECK(j["records"].size() == 6);
    CHECK(j["verdicts"].contains("sandwich_ok"));
    const auto m = nlohmann::json::parse(slurp(out + ".manifest.json"));
    CHECK(m["tool"] == "fraclab");
    CHECK(m["subcommand"] == "sweep");
    CHECK(m["config"]["cells"] == 256);
    CHECK(m.contains("wall_time_s"));
    CHECK(m["config"].contains("seed"));
}

TEST_CASE("usage errors exit with code 2") {
    CaptureStdout cap;
    // hypothesis violation: neumann sweep with s <= 1/p
    CHECK(run_cli({"sweep", "--bc", "neumann", "--s", "0.3", "--p", "3", "--cells", "256",
                   "--weight", "const:1", "--eps", "1/4:1/8"}) == cli::kExitUsage);
    // weight bound violation
    CHECK(run_cli({"sweep", "--bc", "dirichlet", "--weight", "checker:lo=0,hi=1", "--cells",
                   "256", "--eps", "1/4"}) == cli::kExitUsage);
    // unknown flag
    CHECK(run_cli({"sweep", "--no-such-flag", "1"}) == cli::kExitUsage);
    // unknown subcommand
    CHECK(run_cli({"frobnicate"}) == cli::kExitUsage);
    // malformed weight spec
    CHECK(run_cli({"spectrum", "--weight", "sin:base=oops", "--cells", "64", "--eps", "1/4"}) ==
          cli::kExitUsage);
    // under-resolved sweep
    CHECK(run_cli({"sweep", "--cells", "64", "--weight", "const:1", "--eps", "1/4:1/64"}) ==
          cli::kExitUsage);
}

TEST_CASE("spectrum scaling: doubling the weight halves every eigenvalue") {
    CaptureStdout cap;
    REQUIRE(run_cli({"spectrum", "--weight", "const:1", "--cells", "128", "--eps", "limit",
                     "--k", "4", "--s", "0.5", "--out", "cli_spec1.csv"}) == cli::kExitOk);
    REQUIRE(run_cli({"spectrum", "--weight", "const:2", "--cells", "128", "--eps", "limit",
                     "--k", "4", "--s", "0.5", "--out", "cli_spec2.csv"}) == cli::kExitOk);
    std::istringstream s1(slurp("cli_spec1.csv")), s2(slurp("cli_spec2.csv"));
    std::string l1, l2;
    std::getline(s1, l1);
    std::getline(s2, l2);  // headers
    while (std::getline(s1, l1) && std::getline(s2, l2)) {
        const auto c1 = l1.find(','), c2 = l2.find(',');
        const double v1 = std::stod(l1.substr(c1 + 1));
        const double v2 = std::stod(l2.substr(c2 + 1));
        CHECK(v2 == doctest::Approx(v1 / 2.0).epsilon(1e-12));
    }
}

TEST_CASE("config file values are overridden by explicit flags") {
    {
        std::ofstream cfg("cli_config_test.json");
        cfg << R"({"cells": 256, "s": 0.6, "weight": "const:1", "eps": "1/4:1/8", "k": 2})";
    }
    CaptureStdout cap;
    REQUIRE(run_cli({"sweep", "--config", "cli_config_test.json", "--cells", "128", "--out",
                     "cli_config_sweep.csv"}) == cli::kExitOk);
    const auto m = nlohmann::json::parse(slurp("cli_config_sweep.csv.manifest.json"));
    CHECK(m["config"]["cells"] == 128);   // flag wins
    CHECK(m["config"]["s"] == 0.6);       // config value survives
    CHECK(m["config"]["k"] == 2);
    CHECK(run_cli({"sweep", "--config", "/no/such/file.json"}) == cli::kExitUsage);
}

TEST_CASE("poincare, oscillation, boundary-layer and weyl subcommands run") {
    CaptureStdout cap;
    REQUIRE(run_cli({"poincare", "--s", "0.5", "--p", "2", "--cells", "32", "--eps", "1,1/4",
                     "--out", "cli_poincare.csv"}) == cli::kExitOk);
    const std::string pbody = slurp("cli_poincare.csv");
    CHECK(pbody.rfind("param,constant,normalized_constant\n", 0) == 0);

    REQUIRE(run_cli({"oscillation", "--s", "0.5", "--cells", "128", "--weight",
                     "sin:base=2,amp=1", "--eps", "1/4,1/8", "--probes", "6", "--out",
                     "cli_osc.csv"}) == cli::kExitOk);
    CHECK(slurp("cli_osc.csv").rfind("param,", 0) == 0);

    REQUIRE(run_cli({"boundary-layer", "--s", "0.75", "--cells", "64", "--delta", "1/8,1/16",
                     "--out", "cli_bl.csv"}) == cli::kExitOk);
    CHECK(run_cli({"boundary-layer", "--s", "0.4", "--cells", "64", "--delta", "1/8"}) ==
          cli::kExitUsage);

    REQUIRE(run_cli({"weyl", "--s", "0.5", "--cells", "256", "--k-lo", "4", "--k-hi", "20",
                     "--out", "cli_weyl.csv"}) == cli::kExitOk);
    const auto m = nlohmann::json::parse(slurp("cli_weyl.csv.manifest.json"));
    CHECK(m["fit"].contains("slope"));
}

TEST_CASE("help exits zero") {
    CaptureStdout cap;
    CHECK(run_cli({"--help"}) == cli::kExitOk);
}

TEST_CASE("cache directory is honored, including the env fallback") {
    CaptureStdout cap;
    REQUIRE(run_cli({"spectrum", "--weight", "const:1", "--cells", "64", "--eps", "limit",
                     "--k", "2", "--s", "0.45", "--cache-dir", "cli_cache_dir", "--out",
                     "cli_cached_spec.csv"}) == cli::kExitOk);
    bool found = false;
    for (const auto& e : std::filesystem::directory_iterator("cli_cache_dir")) {
        found = found || e.path().extension() == ".bin";
    }
    CHECK(found);
    // second run hits the cache and reproduces the same bytes
    const std::string first = slurp("cli_cached_spec.csv");
    REQUIRE(run_cli({"spectrum", "--weight", "const:1", "--cells", "64", "--eps", "limit",
                     "--k", "2", "--s", "0.45", "--cache-dir", "cli_cache_dir", "--out",
                     "cli_cached_spec.csv"}) == cli::kExitOk);
    CHECK(slurp("cli_cached_spec.csv") == first);

    setenv("FRACLAB_CACHE_DIR", "cli_cache_env", 1);
    REQUIRE(run_cli({"spectrum", "--weight", "const:1", "--cells", "64", "--eps", "limit",
                     "--k", "1", "--s", "0.45", "--out", "cli_cached_env.csv"}) == cli::kExitOk);
    unsetenv("FRACLAB_CACHE_DIR");
    CHECK(std::filesystem::exists("cli_cache_env"));
}

TEST_CASE("verify-all --quick prints a full table of check rows") {
    CaptureStdout cap;
    run_cli({"verify-all", "--quick", "--json-out", "cli_verify_quick.json"});
    const std::string out = cap.buffer.str();
    int rows = 0;
    std::istringstream is(out);
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind("[PASS]", 0) == 0 || line.rfind("[FAIL]", 0) == 0) ++rows;
    }
    CHECK(rows >= 10);
    const auto j = nlohmann::json::parse(slurp("cli_verify_quick.json"));
    CHECK(j.size() == 12);
}
