#include "rfsde/cli.hpp"
#include "rfsde/output.hpp"

#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = rfsde::run_cli(args, out, err);
    return Run{code, out.str(), err.str()};
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("rfsde_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_config(const fs::path& dir, const std::string& body)
{
    const fs::path p = dir / "config.json";
    std::ofstream(p) << body;
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path config_dir()
{
    const char* d = std::getenv("RFSDE_CONFIG_DIR");
    return d ? fs::path(d) : fs::path("configs");
}

const char* kSmall = R"({
  "H": 0.7, "n": 128, "x0": 0.2,
  "drift": {"expr": "-x", "lipschitz": 2},
  "tube": {"lower": "-1 + 0.2*t", "upper": "1"},
  "epsilons": [0.2, 0.1, 0.05],
  "replications": 12,
  "seed": 5
})";

} // namespace

TEST_CASE("sigma2 for the box kernel")
{
    const fs::path d = scratch("sigma2");
    const Run r = cli({"sigma2", write_config(d, R"({"H": 0.75, "kernel": "box"})").string(), "--out-dir", d.string()});
    REQUIRE(r.code == 0);
    CHECK(std::stod(r.out) == doctest::Approx(0.7071068).epsilon(1e-6));
    CHECK(fs::exists(d / "run_manifest.json"));
    CHECK(fs::exists(d / "sigma2.json"));
}

TEST_CASE("config errors exit with 2")
{
    const fs::path d = scratch("errors");
    Run r = cli({"trend", (d / "missing.json").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find((d / "missing.json").string()) != std::string::npos);

    r = cli({"trend", write_config(d, R"({"H": 0.7, "tube_lower": "0"})").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("tube_lower") != std::string::npos);

    r = cli({"trend", write_config(d, R"({"tube": {"lower": "-1", "upper": "1", "middle": "0"}})").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("tube.middle") != std::string::npos);

    r = cli({"trend", write_config(d, R"({"drift": "2 +"})").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("drift") != std::string::npos);
    CHECK(r.err.find("offset 3") != std::string::npos);

    r = cli({"trend", write_config(d, R"({"H": "high"})").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("'H'") != std::string::npos);

    r = cli({"trend", write_config(d, "{ not json").string()});
    CHECK(r.code == 2);

    CHECK(cli({"frobnicate", "x.json"}).code == 2);
    CHECK(cli({}).code == 2);
    CHECK(cli({"trend"}).code == 2);
}

TEST_CASE("numerical and precondition failures")
{
    const fs::path d = scratch("failures");
    Run r = cli({"trend", write_config(d, R"({"tube": {"lower": "t", "upper": "1 - t"}, "x0": 0.2})").string()});
    CHECK(r.code == 3);

    r = cli({"trend", write_config(d, R"({"x0": 5})").string()});
    CHECK(r.code == 4);
    CHECK(r.err.find("x0") != std::string::npos);

    const fs::path cfg = write_config(d, R"({"H": 0.75, "n": 256, "epsilons": [0.1, 0.05, 0.025], "replications": 4})");
    r = cli({"asymptotics", cfg.string(), "--t", "0.01", "--out-dir", d.string()});
    CHECK(r.code == 4);
    CHECK(r.err.find("kernel support") != std::string::npos);
}

TEST_CASE("trend on the moving floor")
{
    const fs::path d = scratch("trend");
    const Run r = cli({"trend", (config_dir() / "moving_floor.json").string(), "--out-dir", d.string()});
    REQUIRE(r.code == 0);
    std::istringstream csv(slurp(d / "trend.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "t,x,y,tau,regime");
    std::size_t rows = 0;
    while (std::getline(csv, line)) {
        std::istringstream row(line);
        std::string t, x, y, tau;
        std::getline(row, t, ',');
        std::getline(row, x, ',');
        std::getline(row, y, ',');
        std::getline(row, tau, ',');
        CHECK(std::abs(std::stod(tau) - std::stod(t)) <= 1.0 / 2048);
        ++rows;
    }
    CHECK(rows == 2049);
}

TEST_CASE("manifest lists every output with its checksum")
{
    const fs::path d = scratch("manifest");
    const fs::path cfg = write_config(d, kSmall);
    REQUIRE(cli({"risk-sweep", cfg.string(), "--out-dir", d.string(), "--svg"}).code == 0);
    const auto m = nlohmann::json::parse(slurp(d / "run_manifest.json"));
    CHECK(m["command"] == "risk-sweep");
    CHECK(m["master_seed"] == 5);
    CHECK(m["grid"]["n"] == 128);
    CHECK(m["tool_version"] == rfsde::out::kToolVersion);
    REQUIRE(m["outputs"].size() == 3);
    for (const auto& o : m["outputs"]) {
        const std::string content = slurp(d / o["file"].get<std::string>());
        CHECK(o["sha256"] == rfsde::out::sha256_hex(content));
    }
    CHECK(rfsde::out::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("outputs do not depend on the thread count")
{
    const fs::path base = scratch("threads");
    const fs::path cfg = write_config(base, kSmall);
    std::string csv, json;
    for (const char* t : {"1", "3", "8"}) {
        const fs::path d = base / t;
        REQUIRE(cli({"risk-sweep", cfg.string(), "--out-dir", d.string(), "--threads", t}).code == 0);
        if (csv.empty()) {
            csv = slurp(d / "risk_curve.csv");
            json = slurp(d / "risk_report.json");
        } else {
            CHECK(slurp(d / "risk_curve.csv") == csv);
            CHECK(slurp(d / "risk_report.json") == json);
        }
    }
}

TEST_CASE("seed override changes the draw and the manifest")
{
    const fs::path base = scratch("seed");
    const fs::path cfg = write_config(base, kSmall);
    REQUIRE(cli({"simulate", cfg.string(), "--out-dir", (base / "a").string()}).code == 0);
    REQUIRE(cli({"simulate", cfg.string(), "--out-dir", (base / "b").string(), "--seed", "6"}).code == 0);
    REQUIRE(cli({"simulate", cfg.string(), "--out-dir", (base / "c").string()}).code == 0);
    CHECK(slurp(base / "a" / "path.csv") != slurp(base / "b" / "path.csv"));
    CHECK(slurp(base / "a" / "path.csv") == slurp(base / "c" / "path.csv"));
    const auto ma = nlohmann::json::parse(slurp(base / "a" / "run_manifest.json"));
    const auto mb = nlohmann::json::parse(slurp(base / "b" / "run_manifest.json"));
    CHECK(ma["config_sha256"] != mb["config_sha256"]);
    CHECK(mb["master_seed"] == 6);
}

TEST_CASE("other subcommands")
{
    const fs::path d = scratch("others");
    const fs::path cfg = write_config(d, kSmall);
    CHECK(cli({"estimate", cfg.string(), "--out-dir", d.string()}).code == 0);
    const auto est = nlohmann::json::parse(slurp(d / "estimate.json"));
    REQUIRE(est["estimates"].size() == 3);
    for (const auto& e : est["estimates"]) {
        const auto& dec = e["decomposition"];
        CHECK(std::abs(dec["sum"].get<double>() - dec["error"].get<double>()) <= 1e-10);
    }
    CHECK(cli({"state-scaling", cfg.string(), "--out-dir", d.string()}).code == 0);
    CHECK(fs::exists(d / "state_scaling.csv"));
    CHECK(cli({"asymptotics", cfg.string(), "--out-dir", d.string()}).code == 0);
    CHECK(fs::exists(d / "asymptotics.json"));
    CHECK(cli({"simulate", cfg.string(), "--out-dir", d.string(), "--circulant"}).code == 0);
}

TEST_CASE("numbers use 17 significant digits without locale")
{
    CHECK(rfsde::out::format_double(0.1) == "0.10000000000000001");
    CHECK(rfsde::out::format_double(1.0) == "1");
    CHECK(rfsde::out::format_double(-2.5e-20) == "-2.4999999999999999e-20");
}
