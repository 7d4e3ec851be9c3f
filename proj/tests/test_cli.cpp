#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("gjsim_cli_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

Result run(const std::string& args, const fs::path& out_dir, const std::string& env = "") {
    const fs::path so = out_dir / "stdout.txt", se = out_dir / "stderr.txt";
    const std::string cmd = env + " " GJSIM_CLI " " + args + " > " + so.string() + " 2> " + se.string();
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(so);
    r.err = slurp(se);
    fs::remove(so);
    fs::remove(se);
    return r;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
    std::ostringstream o;
    for (unsigned i = 0; i < len; ++i) o << "0123456789abcdef"[md[i] >> 4] << "0123456789abcdef"[md[i] & 15];
    return o.str();
}

int data_rows(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    int rows = 0;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        ++rows;
    }
    return rows;
}

// Every file listed in the manifest exists with the recorded digest and
// names the manifest.
void check_manifest(const fs::path& dir, const std::string& command) {
    const std::string name = command + ".manifest.json";
    const json m = json::parse(slurp(dir / name));
    CHECK(m["command"] == command);
    CHECK(m["timing"] == command + ".timing.json");
    CHECK(fs::exists(dir / (command + ".timing.json")));
    CHECK(!m["outputs"].empty());
    for (const auto& [file, digest] : m["outputs"].items()) {
        const std::string bytes = slurp(dir / file);
        CHECK(sha256_hex(bytes) == digest.get<std::string>());
        CHECK(bytes.find(name) != std::string::npos);
    }
}

}  // namespace

TEST_CASE("solve reports the phase and validates input") {
    const fs::path dir = scratch("solve");
    auto r = run("solve --t 10 --b 0 --out " + dir.string(), dir);
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["phase"] == "N");
    check_manifest(dir, "solve");

    r = run("solve --t 1 --b 0 --out " + dir.string(), dir);
    REQUIRE(r.code == 0);
    const json s = json::parse(r.out);
    CHECK(s["phase"] == "S");
    CHECK(s["state"]["converged"] == true);

    r = run("solve --t -1 --out " + dir.string(), dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("temperature") != std::string::npos);

    r = run("solve --config " + (dir / "missing.ini").string() + " --out " + dir.string(), dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("missing.ini") != std::string::npos);

    std::ofstream(dir / "bad.ini") << "[reduced]\nbogus = 1\n";
    r = run("solve --config " + (dir / "bad.ini").string() + " --out " + dir.string(), dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("bogus") != std::string::npos);

    r = run("solve --model micro --out " + dir.string(), dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("micro") != std::string::npos);
}

TEST_CASE("sweep emits one row per grid cell") {
    const fs::path dir = scratch("sweep");
    const auto r = run("sweep --out " + dir.string(), dir);
    REQUIRE(r.code == 0);
    CHECK(data_rows(slurp(dir / "sweep.csv")) == 3600);
    const json summary = json::parse(slurp(dir / "sweep_summary.json"));
    CHECK(summary["rows"] == 3600);
    CHECK(summary["failed"] == 0);
    CHECK(summary["phase_counts"]["S"].get<int>() > 0);
    check_manifest(dir, "sweep");
    const json m = json::parse(slurp(dir / "sweep.manifest.json"));
    CHECK(m["g_lande_z_source"] == "calibrated");
    CHECK(m["config"].get<std::string>().find("g_lande_z") != std::string::npos);
}

TEST_CASE("outputs are byte-deterministic") {
    const fs::path a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
    const std::string args = "sweep --t-points 12 --h-points 10 --gz 15.3154296875 ";
    REQUIRE(run(args + "--threads 3 --out " + a.string(), a).code == 0);
    REQUIRE(run(args + "--threads 3 --out " + b.string(), b).code == 0);
    REQUIRE(run(args + "--threads 1 --out " + c.string(), c).code == 0);
    for (const char* f : {"sweep.csv", "sweep_summary.json", "sweep.manifest.json"})
        CHECK(slurp(a / f) == slurp(b / f));
    CHECK(slurp(a / "sweep.csv") == slurp(c / "sweep.csv"));

    const fs::path d = scratch("det_d"), e = scratch("det_e");
    REQUIRE(run("boundaries --t-points 16 --h-points 16 --gz 15.3154296875 --out " + d.string(), d).code == 0);
    REQUIRE(run("boundaries --t-points 16 --h-points 16 --gz 15.3154296875 --out " + e.string(), e).code == 0);
    CHECK(slurp(d / "boundaries.csv") == slurp(e / "boundaries.csv"));
    CHECK(slurp(d / "boundaries.manifest.json") == slurp(e / "boundaries.manifest.json"));
    check_manifest(d, "boundaries");
}

TEST_CASE("output directory from the environment") {
    const fs::path dir = scratch("env");
    const auto r = run("solve --t 5", dir, "GJSIM_OUT_DIR=" + dir.string());
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "solve.json"));
    CHECK(fs::exists(dir / "solve.manifest.json"));
}

TEST_CASE("thz round trip through files") {
    const fs::path dir = scratch("thz");
    REQUIRE(run("thz-synth --n 2 --kappa 0.05 --d 1.0 --out " + dir.string(), dir).code == 0);
    check_manifest(dir, "thz-synth");
    const std::string ref = (dir / "reference.csv").string(), sam = (dir / "sample.csv").string();
    auto worst_error = [&](const std::string& extra, int& valid) {
        const auto r = run("thz --ref " + ref + " --sam " + sam + " --d 1.0 " + extra + " --out " + dir.string(), dir);
        REQUIRE(r.code == 0);
        check_manifest(dir, "thz");
        std::istringstream in(slurp(dir / "optical_constants.csv"));
        std::string line;
        double worst = 0.0;
        valid = 0;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#' || line[0] == 'f') continue;
            for (char& ch : line)
                if (ch == ',') ch = ' ';
            std::istringstream row(line);
            double f, n, kappa, alpha;
            int v;
            row >> f >> n >> kappa >> alpha >> v;
            if (!v) continue;
            ++valid;
            worst = std::max({worst, std::abs(n - 2.0), std::abs(kappa - 0.05)});
        }
        return worst;
    };
    int valid = 0;
    // no echo window: the synthetic pair is exact up to rounding
    CHECK(worst_error("--echo-refine false", valid) < 1e-9);
    CHECK(valid > 20);
    // the echo window truncates the slowly decaying tail of the synthetic response
    CHECK(worst_error("", valid) < 2e-2);
    const json m = json::parse(slurp(dir / "thz.manifest.json"));
    CHECK(m["inputs"][ref] == sha256_hex(slurp(ref)));

    auto bad = run("thz --ref " + ref + " --sam " + sam + " --out " + dir.string(), dir);
    CHECK(bad.code == 2);
    CHECK(bad.err.find("thickness_mm") != std::string::npos);
    bad = run("thz --ref " + (dir / "nope.csv").string() + " --sam " + sam + " --d 1 --out " + dir.string(), dir);
    CHECK(bad.code == 2);
    CHECK(bad.err.find("nope.csv") != std::string::npos);
}

TEST_CASE("ed emits a parity eigenstate") {
    const fs::path dir = scratch("ed");
    const auto r = run("ed --n 8 --nmax 20 --out " + dir.string(), dir);
    REQUIRE(r.code == 0);
    const json doc = json::parse(slurp(dir / "ed.json"));
    CHECK(std::abs(std::abs(doc["parity_expectation"].get<double>()) - 1.0) < 1e-10);
    CHECK(doc["dimension"] == 5 * 5 * 21);
    check_manifest(dir, "ed");

    const auto bad = run("ed --n 7 --out " + dir.string(), dir);
    CHECK(bad.code == 2);
    CHECK(bad.err.find("n_spins") != std::string::npos);
}

TEST_CASE("calibrate-gz, mce and spectrum") {
    const fs::path dir = scratch("misc");
    auto r = run("calibrate-gz --out " + dir.string(), dir);
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["g_lande_z"].get<double>() == doctest::Approx(15.3154).epsilon(1e-3));

    r = run("mce --t0 3.2 --gz 15.3154296875 --out " + dir.string(), dir);
    REQUIRE(r.code == 0);
    const json mce = json::parse(slurp(dir / "mce.json"));
    REQUIRE(mce["traces"].size() == 1);
    CHECK(data_rows(slurp(dir / mce["traces"][0]["file"].get<std::string>())) == 301);
    check_manifest(dir, "mce");

    r = run("spectrum --config " GJSIM_DATA_DIR "/micro_reference.ini --t 10 --out " + dir.string(), dir);
    REQUIRE(r.code == 0);
    CHECK(data_rows(slurp(dir / "spectrum.csv")) >= 4);
    check_manifest(dir, "spectrum");
    const json m = json::parse(slurp(dir / "spectrum.manifest.json"));
    CHECK(m["inputs"].size() == 1);
}
