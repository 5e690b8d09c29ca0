// Drives the sensel binary end to end; the binary path arrives as argv[1].

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "test_util.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli;
fs::path scratch;

int run(const std::string& args) {
    const std::string cmd = cli + " " + args;
    const int raw = std::system(cmd.c_str());
    if (raw == -1) {
        std::cerr << "[FAIL] could not spawn: " << cmd << "\n";
        std::exit(1);
    }
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good(), "cannot open " << path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

void test_gen_determinism() {
    fs::create_directories(scratch / "g1");
    fs::create_directories(scratch / "g2");
    REQUIRE(run("gen --m 4 --n 2 --seed 7 --out-dir " + (scratch / "g1").string() +
                " 2>/dev/null") == 0,
            "gen run 1");
    REQUIRE(run("gen --m 4 --n 2 --seed 7 --out-dir " + (scratch / "g2").string() +
                " 2>/dev/null") == 0,
            "gen run 2");
    REQUIRE(slurp(scratch / "g1" / "A1.csv") == slurp(scratch / "g2" / "A1.csv"),
            "A1.csv identical across runs");
    REQUIRE(slurp(scratch / "g1" / "A2.csv") == slurp(scratch / "g2" / "A2.csv"),
            "A2.csv identical across runs");
    // Different seed, different bytes.
    REQUIRE(run("gen --m 4 --n 2 --seed 8 --out-dir " + (scratch / "g2").string() +
                " 2>/dev/null") == 0,
            "gen run 3");
    REQUIRE(slurp(scratch / "g1" / "A1.csv") != slurp(scratch / "g2" / "A1.csv"),
            "seed changes the instance");
    testutil::pass("cli gen determinism");
}

void test_solve_fixture() {
    // Alternating unit rows: the uniform relaxed optimum rounds onto one
    // e1 row and one e2 row, so both bounds are exactly 0.
    write(scratch / "alternating.csv", "1,0\n0,1\n1,0\n0,1\n");
    const std::string out = (scratch / "solve.json").string();
    REQUIRE(run("solve --matrix " + (scratch / "alternating.csv").string() +
                " --k 2 --strategy centralized > " + out + " 2>/dev/null") == 0,
            "solve exits 0");
    auto j = nlohmann::json::parse(slurp(out));
    REQUIRE(j["strategy"] == "centralized", "strategy echoed");
    testutil::require_close(j["upper"].get<double>(), 0.0, 1e-8, "U = 0");
    testutil::require_close(j["lower"].get<double>(), 0.0, 1e-8, "L = 0");
    REQUIRE(j["status"] == "ok", "clean rounding");

    // Duplicated-direction fixture: the tie-break picks the two e1 rows,
    // reported through the infeasible-rounding sentinel (lower = null).
    write(scratch / "duplicated.csv", "1,0\n1,0\n0,1\n0,1\n");
    REQUIRE(run("solve --matrix " + (scratch / "duplicated.csv").string() +
                " --k 2 --strategy centralized > " + out + " 2>/dev/null") == 0,
            "solve exits 0 on the sentinel case");
    auto j2 = nlohmann::json::parse(slurp(out));
    testutil::require_close(j2["upper"].get<double>(), 0.0, 1e-8, "U = 0");
    REQUIRE(j2["lower"].is_null(), "lower serialized as null for -inf");
    REQUIRE(j2["status"] == "infeasible_rounding", "sentinel status");

    // The Boolean selection serializes as a single CSV row.
    const std::string sel = (scratch / "selection.csv").string();
    REQUIRE(run("solve --matrix " + (scratch / "alternating.csv").string() +
                " --k 2 --strategy centralized --selection-out " + sel +
                " >/dev/null 2>/dev/null") == 0,
            "solve with --selection-out");
    REQUIRE(slurp(sel) == "1,1,0,0\n", "selection row, got " << slurp(sel));
    testutil::pass("cli solve fixture");
}

void test_session() {
    fs::create_directories(scratch / "inst");
    REQUIRE(run("gen --m 12 --n 3 --seed 3 --pairs 4 --out-dir " +
                (scratch / "inst").string() + " 2>/dev/null") == 0,
            "gen instance");
    const std::string msg = (scratch / "msg.json").string();
    const std::string out = (scratch / "session.json").string();
    REQUIRE(run("session --a1 " + (scratch / "inst" / "A1.csv").string() + " --a2 " +
                (scratch / "inst" / "A2.csv").string() +
                " --k 6 --strategy fdm --n-shared 2 --message-out " + msg + " > " + out +
                " 2>/dev/null") == 0,
            "session exits 0");
    auto message = nlohmann::json::parse(slurp(msg));
    REQUIRE(message["sender"] == 1 && message["n"] == 3, "message header");
    REQUIRE(message["vectors"].size() == 2, "two shared vectors");
    auto outcome = nlohmann::json::parse(slurp(out));
    REQUIRE(outcome["strategy"] == "fdm", "fdm outcome");
    REQUIRE(outcome["z_boolean"].size() == 12, "stacked selection length");

    // The session must agree with the plain solve.
    const std::string direct = (scratch / "direct.json").string();
    REQUIRE(run("solve --a1 " + (scratch / "inst" / "A1.csv").string() + " --a2 " +
                (scratch / "inst" / "A2.csv").string() +
                " --k 6 --strategy fdm --n-shared 2 > " + direct + " 2>/dev/null") == 0,
            "direct solve");
    auto direct_json = nlohmann::json::parse(slurp(direct));
    REQUIRE(direct_json["z_boolean"] == outcome["z_boolean"], "session equals solve");
    testutil::pass("cli session");
}

void test_experiment_and_sweep() {
    write(scratch / "cfg.json", R"({
        "m": 12, "n": 3, "k_s": 6, "N": 2, "sigma_corr": 0.1,
        "num_correlated_pairs": 3, "trials": 4, "master_seed": 11
    })");
    const std::string results1 = (scratch / "r1.csv").string();
    const std::string results2 = (scratch / "r2.csv").string();
    const std::string summary = (scratch / "s.csv").string();
    REQUIRE(run("experiment --config " + (scratch / "cfg.json").string() + " --out " +
                results1 + " --summary " + summary + " --jobs 1 2>/dev/null") == 0,
            "experiment exits 0");
    REQUIRE(run("experiment --config " + (scratch / "cfg.json").string() + " --out " +
                results2 + " --summary " + summary + " --jobs 2 2>/dev/null") == 0,
            "experiment with 2 jobs");
    REQUIRE(slurp(results1) == slurp(results2), "job count does not change the CSV");

    const std::string first_line = slurp(results1).substr(0, slurp(results1).find('\n'));
    REQUIRE(first_line == "trial,strategy,N,U_cen,L,gap_rel_percent,status",
            "per-trial schema");

    // Summary parses back: header + one row per strategy.
    std::istringstream s(slurp(summary));
    std::string line;
    int rows = 0;
    while (std::getline(s, line)) ++rows;
    REQUIRE(rows == 1 + 4, "summary rows");

    const std::string sweep_out = (scratch / "sw.csv").string();
    const std::string sweep_summary = (scratch / "sws.csv").string();
    REQUIRE(run("sweep-n --config " + (scratch / "cfg.json").string() +
                " --n-list 0,2 --out " + sweep_out + " --summary " + sweep_summary +
                " --jobs 1 2>/dev/null") == 0,
            "sweep exits 0");
    std::istringstream sw(slurp(sweep_summary));
    rows = 0;
    while (std::getline(sw, line)) ++rows;
    REQUIRE(rows == 1 + 4 * 2, "summary has a row per strategy per N");
    testutil::pass("cli experiment and sweep");
}

void test_exit_codes() {
    REQUIRE(run("solve --matrix does_not_exist.csv --k 2 --strategy centralized "
                "2>/dev/null >/dev/null") == 1,
            "missing file exits 1");
    REQUIRE(run("solve --matrix whatever.csv --k 2 --no-such-flag 2>/dev/null >/dev/null") ==
                1,
            "unknown flag exits 1");
    write(scratch / "alt.csv", "1,0\n0,1\n1,0\n0,1\n");
    REQUIRE(run("solve --matrix " + (scratch / "alt.csv").string() +
                " --k 3 --strategy decentralized 2>/dev/null >/dev/null") == 1,
            "odd k exits 1");
    REQUIRE(run("2>/dev/null >/dev/null") == 1, "missing subcommand exits 1");
    testutil::pass("cli exit codes");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "[FAIL] usage: test_cli <path-to-sensel>\n";
        return 1;
    }
    cli = argv[1];
    scratch = fs::temp_directory_path() / "sensel_cli_test";
    fs::remove_all(scratch);
    fs::create_directories(scratch);

    test_gen_determinism();
    test_solve_fixture();
    test_session();
    test_experiment_and_sweep();
    test_exit_codes();
    std::cout << "[PASS] cli suite\n";
    return 0;
}
