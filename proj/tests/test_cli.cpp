// Drives the built CLI end to end through a shell. The binary path arrives
// in the LGCERT_CLI environment variable (set by CTest).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string cli_path() {
    const char* p = std::getenv("LGCERT_CLI");
    REQUIRE_MESSAGE(p != nullptr, "LGCERT_CLI must point at the lgcert binary");
    return p;
}

struct RunResult {
    int exit_code;
    std::string output;
};

RunResult run(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string output;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe)) output += buf.data();
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), output};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::filesystem::path tmpdir() {
    const auto dir = std::filesystem::temp_directory_path() / "lgcert_cli_test";
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("help and usage errors") {
    CHECK(run("--help").exit_code == 0);
    for (const char* sub : {"bound", "optimize", "simulate", "certify", "memory-curve",
                            "nsit-audit", "repro-paper"}) {
        const RunResult r = run(std::string(sub) + " --help");
        CHECK(r.exit_code == 0);
        CHECK(r.output.find("--") != std::string::npos);
    }
    CHECK(run("bound --no-such-flag").exit_code == 1);
    CHECK(run("no-such-command").exit_code == 1);
    CHECK(run("bound").exit_code == 1);             // needs --alpha or --grid
    CHECK(run("bound --alpha 0.7").exit_code == 1); // out of range
}

TEST_CASE("bound endpoints") {
    const RunResult joint = run("bound --alpha 0.5 --mode joint");
    CHECK(joint.exit_code == 0);
    CHECK(joint.output.find("0.5,1.41504,joint") != std::string::npos);

    const RunResult cond = run("bound --alpha 0.5 --mode conditional");
    CHECK(cond.output.find("0.5,0.415037,conditional") != std::string::npos);

    const RunResult js = run("bound --alpha 0.5 --mode joint --format json");
    CHECK(js.exit_code == 0);
    CHECK(js.output.find("\"bits\": 1.415") != std::string::npos);
    CHECK(run("bound --alpha 0.5 --format yaml").exit_code == 1);

    const RunResult grid = run("bound --grid 0:0.5:0.05 --mode joint");
    CHECK(grid.exit_code == 0);
    // Header plus 11 rows, strictly increasing bits.
    std::istringstream lines(grid.output);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "alpha,bits,mode");
    int rows = 0;
    double prev = -1.0;
    while (std::getline(lines, line) && !line.empty()) {
        const double bits = std::stod(line.substr(line.find(',') + 1));
        CHECK(bits > prev);
        prev = bits;
        ++rows;
    }
    CHECK(rows == 11);
}

TEST_CASE("certify command") {
    const RunResult uni = run("certify --I 1.31 --n 100000 --delta 0.01 --dist uniform");
    CHECK(uni.exit_code == 0);
    CHECK(uni.output.find("total_bits 3672") != std::string::npos);

    const RunResult bia =
        run("certify --I 1.31 --n 100000 --delta 0.01 --dist biased:1/6,5/12,5/12");
    CHECK(bia.output.find("total_bits 2777") != std::string::npos);

    const RunResult nomem =
        run("certify --I 1.31 --n 100000 --delta 0.01 --dist uniform --no-memory");
    CHECK(nomem.output.find("total_bits 5406") != std::string::npos);

    // No violation: zero bits, threshold exit code.
    const RunResult none = run("certify --I 1.0 --n 100000 --delta 0.01");
    CHECK(none.exit_code == 2);
    CHECK(none.output.find("total_bits 0") != std::string::npos);
}

TEST_CASE("simulate is reproducible and certifiable") {
    const auto dir = tmpdir();
    const auto t1 = dir / "t1.jsonl";
    const auto t2 = dir / "t2.jsonl";
    const std::string flags =
        " --canonical-alpha 0.31 --n 20000 --seed 7 --audit 0.1 --dist uniform";
    CHECK(run("simulate" + flags + " --out " + t1.string()).exit_code == 0);
    CHECK(run("simulate" + flags + " --out " + t2.string()).exit_code == 0);
    const std::string c1 = slurp(t1), c2 = slurp(t2);
    CHECK(!c1.empty());
    CHECK(c1 == c2); // byte-identical reruns

    std::istringstream lines(c1);
    std::string line;
    int count = 0;
    while (std::getline(lines, line))
        if (!line.empty()) ++count;
    CHECK(count == 20000);

    const RunResult cert = run("certify --trials " + t1.string() +
                               " --dist uniform --audit 0.1 --delta 0.01");
    CHECK(cert.exit_code == 0);
    CHECK(cert.output.find("\"nsit_hat\": [") != std::string::npos);
    // The stream came from the canonical strategy at alpha = 0.31, so the
    // estimate lands near 1.31 (3 sigma at n = 20000 is about 0.06).
    const auto ipos = cert.output.find("\"I_hat\":");
    REQUIRE(ipos != std::string::npos);
    CHECK(std::abs(std::stod(cert.output.substr(ipos + 8)) - 1.31) < 0.06);

    const RunResult missing = run("certify --trials /nonexistent.jsonl --delta 0.01");
    CHECK(missing.exit_code == 3);
}

TEST_CASE("simulate from a strategy file with drift and bit output") {
    const auto dir = tmpdir();
    const auto strat = dir / "strategy.json";
    std::ofstream(strat) << R"({"nx":0,"ny":0,"nz":0,"x1":0,"y1":0,"z1":0.6929,)"
                         << R"("x2":0,"y2":0,"z2":0.6929,"a":0,"b":1})";
    const auto out = dir / "drift.jsonl";
    const auto bits = dir / "bits";
    const RunResult r = run("simulate --strategy " + strat.string() +
                            " --n 5000 --seed 5 --audit 0.1 --drift z1:0.05:700 --out " +
                            out.string() + " --bits " + bits.string());
    CHECK(r.exit_code == 0);
    CHECK(std::filesystem::exists(out));
    CHECK(std::filesystem::exists(dir / "drift.jsonl.manifest.json"));
    CHECK(std::filesystem::exists(bits / "bits_x1_y3_a1.txt"));
    CHECK(std::filesystem::exists(bits / "bits_x0_y2_a0.txt"));

    CHECK(run("simulate --strategy /nonexistent.json --n 10 --seed 1").exit_code == 3);
    CHECK(run("simulate --canonical-alpha 0.3 --n 10 --drift bogus:1:2 --out " +
              (dir / "x.jsonl").string())
              .exit_code == 1);
}

TEST_CASE("optimize command") {
    const RunResult r =
        run("optimize --alpha 0.5 --v 0 --mode conditional --restarts 6 --seed 3");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("\"converged\": true") != std::string::npos);
    const auto pos = r.output.find("\"best_value\":");
    REQUIRE(pos != std::string::npos);
    const double value = std::stod(r.output.substr(pos + 13));
    CHECK(std::abs(value - 0.75) < 2e-3);

    const RunResult tgt =
        run("optimize --alpha 0.5 --v 0 --mode joint --target 13:+- --restarts 2 --seed 3");
    CHECK(tgt.exit_code == 0);
    const auto tpos = tgt.output.find("\"best_value\":");
    REQUIRE(tpos != std::string::npos);
    CHECK(std::abs(std::stod(tgt.output.substr(tpos + 13)) - 0.375) < 2e-3);
    CHECK(run("optimize --alpha 0.3 --target nonsense").exit_code == 1);
}

TEST_CASE("memory curve and nsit audit commands") {
    const RunResult mem = run("memory-curve --I 1.31 --delta 0.01 --n-grid 1000:100000:5");
    CHECK(mem.exit_code == 0);
    CHECK(mem.output.find("n,total_bits,mode") != std::string::npos);
    CHECK(mem.output.find("100000,3672,conditional") != std::string::npos);

    const RunResult audit = run("nsit-audit --n 100000 --delta 0.01");
    CHECK(audit.exit_code == 0);
    CHECK(audit.output.find("100000,0.0143956,0.0143956,0.0143956") != std::string::npos);
}
