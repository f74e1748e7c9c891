#include <catch2/catch.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cadeft/bitstream.hpp"
#include "cadeft/fasta.hpp"
#include "testutil.hpp"

// Integration tests driving the installed binary. The path comes from the
// CADEFT_CLI environment variable set by ctest.

namespace {

std::string cli_path() {
    const char* p = std::getenv("CADEFT_CLI");
    REQUIRE(p != nullptr);
    return p;
}

struct CliResult {
    int exit_code = -1;
    std::string output;  // captured stdout
};

CliResult run_cli(const testutil::TempDir& dir, const std::string& args) {
    static int counter = 0;
    const auto out_path = dir.file("stdout-" + std::to_string(counter++) + ".txt");
    const std::string cmd =
        "\"" + cli_path() + "\" " + args + " > \"" + out_path + "\" 2>/dev/null";
    const int raw = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WEXITSTATUS(raw);
    std::ifstream in(out_path);
    std::stringstream ss;
    ss << in.rdbuf();
    result.output = ss.str();
    return result;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string make_phage(const testutil::TempDir& dir, std::uint64_t seed, std::size_t length) {
    cadeft::RandomSource rng(seed);
    const auto path = dir.file("phage.fasta");
    cadeft::write_fasta_file(
        path, {{"synthetic-phage",
                cadeft::NucleotideSequence::dna(testutil::random_dna(rng, length))}});
    return path;
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
    testutil::TempDir dir;
    CHECK(run_cli(dir, "sim sweep").exit_code == 2);  // missing --phage
    CHECK(run_cli(dir, "sim prime --source phage").exit_code == 2);
    CHECK(run_cli(dir, "scan --bitstream /nonexistent --locus /nonexistent").exit_code == 2);
    CHECK(run_cli(dir, "nonsense").exit_code == 2);

    const auto phage = make_phage(dir, 1, 2000);
    CHECK(run_cli(dir, "sim sweep --phage " + phage + " --rates 1.5 --variants 1").exit_code == 2);
}

TEST_CASE("help exits zero") {
    testutil::TempDir dir;
    const auto r = run_cli(dir, "--help");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("scan") != std::string::npos);
}

TEST_CASE("scan exit codes distinguish clean, detected, and error") {
    testutil::TempDir dir;
    const auto locus = dir.file("locus.txt");
    const auto corpus = dir.file("corpus.bin");
    const auto infected = dir.file("infected.bin");

    REQUIRE(run_cli(dir, "locus init --output " + locus).exit_code == 0);
    REQUIRE(run_cli(dir, "locus add --locus " + locus +
                             " --id t1 --bits 0123456789abcdef --note family-x")
                .exit_code == 0);
    REQUIRE(run_cli(dir, "corpus gen --output " + corpus + " --packets 4 --words 12 --seed 5")
                .exit_code == 0);

    // clean corpus: exit 0, no alerts
    const auto clean = run_cli(dir, "scan --bitstream " + corpus + " --locus " + locus);
    CHECK(clean.exit_code == 0);
    CHECK(clean.output.find("exact-alerts 0") != std::string::npos);

    // injected corpus: exit 1, offset reported
    REQUIRE(run_cli(dir, "corpus inject --bitstream " + corpus + " --output " + infected +
                             " --packet 2 --bit-offset 65 --signature-hex 0123456789abcdef")
                .exit_code == 0);
    const auto detected = run_cli(dir, "scan --bitstream " + infected + " --locus " + locus);
    CHECK(detected.exit_code == 1);
    CHECK(detected.output.find("packet 2") != std::string::npos);
    CHECK(detected.output.find("bit 65") != std::string::npos);

    // a file with no sync word: exit 2
    const auto nosync = dir.file("nosync.bin");
    std::ofstream(nosync, std::ios::binary) << std::string(16, '\0');
    CHECK(run_cli(dir, "scan --bitstream " + nosync + " --locus " + locus).exit_code == 2);
}

TEST_CASE("scan --learn persists the updated locus") {
    testutil::TempDir dir;
    const auto locus = dir.file("locus.txt");
    const auto markers = dir.file("markers.txt");
    const auto corpus = dir.file("corpus.bin");

    std::ofstream(markers) << "0x00B learn\n";
    REQUIRE(run_cli(dir, "locus init --output " + locus + " --markers " + markers).exit_code == 0);
    REQUIRE(run_cli(dir, "locus add --locus " + locus + " --id t1 --bits fedcba9876543210")
                .exit_code == 0);
    REQUIRE(run_cli(dir, "corpus gen --output " + corpus +
                             " --packets 3 --words 16 --addresses 0x00B --seed 6")
                .exit_code == 0);
    REQUIRE(run_cli(dir, "corpus inject --bitstream " + corpus +
                             " --packet 1 --bit-offset 40 --signature-hex fedcba9876543210 "
                             "--flips 6 --seed 2")
                .exit_code == 0);

    // first scan learns (no alert), second scan alerts exactly
    const auto first =
        run_cli(dir, "scan --bitstream " + corpus + " --locus " + locus + " --learn");
    CHECK(first.exit_code == 0);
    CHECK(first.output.find("learned 1") != std::string::npos);

    const auto second =
        run_cli(dir, "scan --bitstream " + corpus + " --locus " + locus + " --learn");
    CHECK(second.exit_code == 1);
    CHECK(second.output.find("exact-alerts 1") != std::string::npos);
    CHECK(second.output.find("learned 0") != std::string::npos);

    const auto listing = run_cli(dir, "locus list --locus " + locus);
    CHECK(listing.output.find("learned") != std::string::npos);
}

TEST_CASE("identical seeds give byte-identical outputs") {
    testutil::TempDir dir;
    const auto phage = make_phage(dir, 7, 6000);

    SECTION("sim prime") {
        const auto a = dir.file("a.csv");
        const auto b = dir.file("b.csv");
        const std::string common = "sim prime --source phage --phage " + phage +
                                   " --iterations 2 --fragments 60 --crrnas 20 --seed 11 -o ";
        REQUIRE(run_cli(dir, common + a).exit_code == 0);
        REQUIRE(run_cli(dir, common + b).exit_code == 0);
        const auto ca = read_file(a);
        CHECK_FALSE(ca.empty());
        CHECK(ca == read_file(b));
    }
    SECTION("corpus gen") {
        const auto a = dir.file("a.bin");
        const auto b = dir.file("b.bin");
        const std::string common = "corpus gen --packets 5 --words 9 --seed 13 -o ";
        REQUIRE(run_cli(dir, common + a).exit_code == 0);
        REQUIRE(run_cli(dir, common + b).exit_code == 0);
        const auto ca = read_file(a);
        CHECK_FALSE(ca.empty());
        CHECK(ca == read_file(b));
    }
}

TEST_CASE("sweep emits one stats row per mutation rate") {
    testutil::TempDir dir;
    const auto phage = make_phage(dir, 15, 5000);
    const auto r = run_cli(dir, "sim sweep --phage " + phage +
                                    " --rates 0.005,0.01,0.02 --variants 2 --fragments 50"
                                    " --crrnas 10 --seed 31");
    REQUIRE(r.exit_code == 0);
    std::istringstream lines(r.output);
    std::string line;
    std::size_t rows = 0;
    std::getline(lines, line);  // header
    while (std::getline(lines, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);
}

TEST_CASE("config file presets options and flags override it") {
    testutil::TempDir dir;
    const auto phage = make_phage(dir, 9, 4000);
    const auto cfg = dir.file("cfg.toml");
    std::ofstream(cfg) << "[sim.prime]\niterations=2\ncrrnas=10\n";

    const std::string base = "sim prime --config " + cfg + " --source phage --phage " + phage +
                             " --fragments 40 --seed 3";
    const auto from_config = run_cli(dir, base);
    REQUIRE(from_config.exit_code == 0);
    CHECK(from_config.output.find(",2,10,") != std::string::npos);  // iterations=2, crrnas=10

    const auto overridden = run_cli(dir, base + " --iterations 4");
    REQUIRE(overridden.exit_code == 0);
    CHECK(overridden.output.find(",4,10,") != std::string::npos);
}

TEST_CASE("json report format is parseable and complete") {
    testutil::TempDir dir;
    const auto locus = dir.file("locus.txt");
    const auto corpus = dir.file("c.bin");
    REQUIRE(run_cli(dir, "locus init --output " + locus).exit_code == 0);
    REQUIRE(run_cli(dir, "locus add --locus " + locus + " --id t --bits aaaaaaaaaaaaaaaa")
                .exit_code == 0);
    REQUIRE(run_cli(dir, "corpus gen --output " + corpus + " --packets 2 --words 8 --seed 4")
                .exit_code == 0);
    REQUIRE(run_cli(dir, "corpus inject --bitstream " + corpus +
                             " --packet 0 --bit-offset 0 --signature-hex aaaaaaaaaaaaaaaa")
                .exit_code == 0);

    const auto r =
        run_cli(dir, "scan --bitstream " + corpus + " --locus " + locus + " --format json");
    CHECK(r.exit_code == 1);
    const auto j = nlohmann::json::parse(r.output);
    CHECK(j["counters"]["exact_alerts"] == 1);
    CHECK(j["events"][0]["packet_index"] == 0);
    CHECK(j["events"][0]["bit_offset_in_payload"] == 0);
}
