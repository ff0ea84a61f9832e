#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr interleaved
};

RunResult run_cli(const std::string& args) {
    const std::string command = std::string(QKDSIM_BINARY) + " " + args + " 2>&1";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);

    RunResult result;
    char buffer[4096];
    while (std::size_t got = fread(buffer, 1, sizeof(buffer), pipe)) {
        result.output.append(buffer, got);
    }
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

int count_lines(const std::string& text) {
    int lines = 0;
    for (char c : text) lines += c == '\n';
    return lines;
}

/// Scratch directory, removed when the test binary exits normally.
struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("qkdsim_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("rate with defaults reports both variants as JSON") {
    const RunResult r = run_cli("rate");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("\"v1\"") != std::string::npos);
    CHECK(r.output.find("\"v2\"") != std::string::npos);
    CHECK(r.output.find("\"key_rate_bps\"") != std::string::npos);
}

TEST_CASE("configuration mistakes exit with code 2") {
    CHECK(run_cli("rate --override link.length_km=abc").exit_code == 2);
    CHECK(run_cli("rate --override bogus.key=1").exit_code == 2);
    CHECK(run_cli("rate --override detector.efficiency=0").exit_code == 2);
    CHECK(run_cli("rate --override intensity.u=0.05").exit_code == 2);  // u < v
    CHECK(run_cli("definitely-not-a-command").exit_code == 2);
    CHECK(run_cli("sweep-distance --from 10 --to 20").exit_code == 2);  // no --step
    CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("distance sweep emits the frozen CSV schema") {
    const RunResult r = run_cli("sweep-distance --from 100 --to 240 --step 20");
    CHECK(r.exit_code == 0);

    std::istringstream lines(r.output);
    std::string header;
    std::getline(lines, header);
    CHECK(header ==
          "x,unit,rate_v1_bps,rate_v2_bps,qber,n0_low,n1_low,n1_up,eph_up,"
          "lambda_ec,secure_len_v1,secure_len_v2");
    CHECK(count_lines(r.output) == 9);  // header + 8 inclusive points
    CHECK(r.output.find("100,km,") != std::string::npos);
    CHECK(r.output.find("240,km,") != std::string::npos);

    SUBCASE("an empty range still prints the header") {
        const RunResult empty = run_cli("sweep-distance --from 240 --to 100 --step 20");
        CHECK(empty.exit_code == 0);
        CHECK(count_lines(empty.output) == 1);
    }
}

TEST_CASE("file outputs are rerun-identical and carry a manifest") {
    TempDir tmp;
    const std::string csv_path = (tmp.path / "sweep.csv").string();
    const std::string args =
        "sweep-distance --from 120 --to 160 --step 20 --csv " + csv_path;

    CHECK(run_cli(args).exit_code == 0);
    const std::string first = slurp(csv_path);
    REQUIRE(fs::exists(csv_path + ".manifest.json"));
    const std::string manifest = slurp(csv_path + ".manifest.json");
    CHECK(manifest.find("\"created_utc\"") != std::string::npos);
    CHECK(manifest.find("\"params\"") != std::string::npos);
    CHECK(first.find("created") == std::string::npos);  // data stays timestamp-free

    CHECK(run_cli(args).exit_code == 0);
    CHECK(slurp(csv_path) == first);
}

TEST_CASE("power sweep needs a data channel and then works") {
    CHECK(run_cli("sweep-power --from -40 --to -30 --step 5").exit_code == 2);

    const std::string with_channel =
        "sweep-power --from -40 --to -30 --step 5"
        " --override mux.enabled=true"
        " --override mux.channels.0.role=data"
        " --override link.extra_loss_db=1.9";
    const RunResult r = run_cli(with_channel);
    CHECK(r.exit_code == 0);
    CHECK(count_lines(r.output) == 4);  // header + 3 points
    CHECK(r.output.find(",dBm,") != std::string::npos);
}

TEST_CASE("stochastic runs reproduce per seed") {
    const std::string args = "rate --mode stochastic --override link.session_pulses=1e10";
    const RunResult a = run_cli(args + " --seed 7");
    const RunResult b = run_cli(args + " --seed 7");
    const RunResult c = run_cli(args + " --seed 8");
    CHECK(a.exit_code == 0);
    CHECK(a.output == b.output);
    CHECK(a.output != c.output);
}

TEST_CASE("rate to file embeds the manifest path") {
    TempDir tmp;
    const std::string json_path = (tmp.path / "rate.json").string();
    CHECK(run_cli("rate --json " + json_path).exit_code == 0);
    const std::string report = slurp(json_path);
    CHECK(report.find("\"manifest_path\"") != std::string::npos);
    REQUIRE(fs::exists(json_path + ".manifest.json"));
}

TEST_CASE("quick numerical selftest passes") {
    const RunResult r = run_cli("selftest --lp-cases 25 --sandwich-cases 4"
                                " --override link.session_pulses=1e11");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("0 failures") != std::string::npos);
}

TEST_CASE("parameter optimization beats the starting point") {
    const RunResult base = run_cli("rate --override link.length_km=120");
    const RunResult opt = run_cli("optimize --override link.length_km=120");
    REQUIRE(base.exit_code == 0);
    REQUIRE(opt.exit_code == 0);

    auto rate_of = [](const std::string& text) {
        const auto at = text.find("\"key_rate_bps\"");
        REQUIRE(at != std::string::npos);
        return std::strtod(text.c_str() + text.find(':', at) + 1, nullptr);
    };
    // First rate in the base report is the all-intensity variant's — the
    // larger of the two at this distance, so beating it shows real tuning.
    const double before = rate_of(base.output);
    const double after = rate_of(opt.output);
    CHECK(after > before);
    CHECK(opt.output.find("\"params\"") != std::string::npos);
}
