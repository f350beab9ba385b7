#include "doctest.h"
#include "helpers.hpp"

#include <cstdlib>
#include <map>
#include <random>
#include <sstream>
#include <sys/wait.h>

#ifndef ESGVINE_BIN
#error "ESGVINE_BIN must point at the esgvine executable"
#endif

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

// Runs the CLI from `cwd` with shell-quoted arguments.
Run run_cli(const fs::path& cwd, const std::string& args) {
    const fs::path out = cwd / ".stdout", err = cwd / ".stderr";
    const std::string cmd = "cd '" + cwd.string() + "' && '" + std::string(ESGVINE_BIN) + "' " + args + " >'" +
                            out.string() + "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = testutil::read_text(out);
    r.err = testutil::read_text(err);
    fs::remove(out);
    fs::remove(err);
    return r;
}

const char* kTruth = R"({"start_date": "2016-01-04", "days": 400,
 "assets": [{"id": "a1", "class": "A", "market_cap": 2}, {"id": "a2", "class": "A"},
            {"id": "b1", "class": "B"}, {"id": "b2", "class": "B"}, {"id": "c1", "class": "C"},
            {"id": "d1", "class": "D"}, {"id": "d2", "class": "D", "market_cap": 3}],
 "default_edge": {"family": "gaussian", "params": [0.3]},
 "tree_defaults": [{"family": "student", "params": [0.5, 5]}, null, null, {"family": "indep"}],
 "edges": [{"first": "I_A", "second": "I_M", "family": "clayton", "params": [1.5]}]})";

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = testutil::read_text(e.path());
    return files;
}

// simulate -> fit -> risk -> report inside `root`, output under root/out.
std::map<std::string, std::string> full_pipeline(const fs::path& root) {
    testutil::write_text(root / "truth.json", kTruth);
    REQUIRE(run_cli(root, "simulate --truth truth.json --output-dir out --seed 11 --catalog itau").code == 0);
    for (const char* stage : {"fit", "risk", "report"}) {
        const Run r = run_cli(root, std::string(stage) + " -c out/sim_config.ini");
        INFO(stage, ": ", r.err);
        REQUIRE(r.code == 0);
    }
    return snapshot(root / "out");
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("exit codes for usage and configuration errors") {
    testutil::TempDir dir("cli_codes");
    CHECK(run_cli(dir.path(), "").code == 2);
    CHECK(run_cli(dir.path(), "fit --no-such-flag").code == 2);
    CHECK(run_cli(dir.path(), "frobnicate").code == 2);
    const Run psi = run_cli(dir.path(), "classify --psi0 2");
    CHECK(psi.code == 2);
    CHECK(psi.err.find("psi0 must lie in (0,1)") != std::string::npos);
    testutil::write_text(dir / "bad.ini", "catalog = itau\nnot a setting\n");
    const Run bad = run_cli(dir.path(), "fit -c bad.ini");
    CHECK(bad.code == 2);
    CHECK(bad.err.find("config line 2") != std::string::npos);
    CHECK(run_cli(dir.path(), "fit -c missing.ini").code == 2);
    CHECK(run_cli(dir.path(), "classify --help").code == 0);
}

TEST_CASE("exit code 3 for missing or inconsistent inputs") {
    testutil::TempDir dir("cli_data");
    const Run r = run_cli(dir.path(), "classify --data-dir nowhere");
    CHECK(r.code == 3);
    CHECK(r.err.find("data error") != std::string::npos);
    CHECK(r.out.empty());

    testutil::write_text(dir / "truth.json", R"({"days": 50, "assets": [{"id": "x", "class": "Q"}]})");
    CHECK(run_cli(dir.path(), "simulate --truth truth.json --output-dir out").code == 3);
}

TEST_CASE("exit code 4 for a numerical failure") {
    testutil::TempDir dir("cli_num");
    testutil::write_text(dir / "truth.json", R"({"start_date": "2016-01-04", "days": 300,
        "assets": [{"id": "a1", "class": "A"}, {"id": "b1", "class": "B"}, {"id": "c1", "class": "C"},
                   {"id": "d1", "class": "D"}], "default_edge": {"family": "gaussian", "params": [0.3]}})");
    REQUIRE(run_cli(dir.path(), "simulate --truth truth.json --output-dir out --catalog itau").code == 0);

    // Replace a1 by a series whose scale jumps by 1e4 halfway: the GARCH
    // optimum then sits on the unit-persistence boundary.
    std::istringstream in(testutil::read_text(dir / "out" / "returns.csv"));
    std::string line, body;
    std::getline(in, line);
    body = line + "\n";
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    for (int t = 0; std::getline(in, line); ++t) {
        const auto a = line.find(','), b = line.find(',', a + 1);
        std::ostringstream v;
        v.precision(17);
        v << z(rng) * (t < 150 ? 1e-3 : 10.0);
        body += line.substr(0, a + 1) + v.str() + line.substr(b) + "\n";
    }
    testutil::write_text(dir / "out" / "returns.csv", body);

    // classification outputs no longer match the panel
    CHECK(run_cli(dir.path(), "fit -c out/sim_config.ini").code == 3);
    REQUIRE(run_cli(dir.path(), "classify -c out/sim_config.ini").code == 0);
    const Run r = run_cli(dir.path(), "fit -c out/sim_config.ini");
    CHECK(r.code == 4);
    CHECK(r.err.find("stationarity") != std::string::npos);
}

TEST_CASE("pipeline runs end to end and is byte-identical across runs") {
    testutil::TempDir one("cli_run1"), two("cli_run2");
    const auto a = full_pipeline(one.path());
    const auto b = full_pipeline(two.path());
    for (const char* name : {"returns.csv", "model_2016-2017_itau.json", "comparison.csv", "census_itau_T1.csv",
                             "riskreport.csv", "aggregate.csv", "report.txt", "truth.json"}) {
        CHECK_MESSAGE(a.count(name) == 1, name);
    }
    REQUIRE(a.size() == b.size());
    for (const auto& [name, text] : a) CHECK_MESSAGE(b.at(name) == text, name);

    const std::string& report = a.at("report.txt");
    CHECK(report.find("itau & 2016-2017 & 400 & ") != std::string::npos);
    CHECK(report.find("Studentst & ") != std::string::npos);
    // one model row: the six table columns plus rank and winner
    std::istringstream cmp(a.at("comparison.csv"));
    std::string line;
    std::size_t data_rows = 0;
    while (std::getline(cmp, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("model,", 0) == 0) continue;
        ++data_rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 7);
    }
    CHECK(data_rows == 1);

    // risk refuses an archive fitted on other inputs
    testutil::write_text(one / "out" / "meta.csv", a.at("meta.csv") + "zz,S9,1\n");
    CHECK(run_cli(one.path(), "risk -c out/sim_config.ini").code == 3);
}

}  // TEST_SUITE
