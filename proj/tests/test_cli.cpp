#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fxmf/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("fxmf_cli_" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string operator/(const std::string& f) const { return (dir / f).string(); }
};

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream o, e;
    const int code = fxmf::cli::run(args, o, e);
    return {code, o.str(), e.str()};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json read_json(const std::string& path) { return json::parse(slurp(path)); }

}  // namespace

TEST_CASE("cli: exit codes") {
    Scratch t("codes");
    CHECK(run({}).code == fxmf::cli::kUsageError);
    CHECK(run({"bogus"}).code == fxmf::cli::kUsageError);
    const auto missing = run({"distfit", t / "missing.csv", "-o", t / "o"});
    CHECK(missing.code == fxmf::cli::kDataError);
    CHECK(missing.err.find("missing.csv") != std::string::npos);
    const auto flag = run({"synth", "--no-such-flag", "-o", t / "o"});
    CHECK(flag.code == fxmf::cli::kUsageError);
    CHECK(flag.err.find("--kind") != std::string::npos);  // help follows the error
    CHECK(run({"synth", "--kind", "brownian", "-o", t / "o"}).code == fxmf::cli::kUsageError);
    CHECK(run({"synth", "--help"}).code == fxmf::cli::kOk);
}

TEST_CASE("cli: synth then mfdfa") {
    Scratch t("mfdfa");
    REQUIRE(run({"synth", "--kind", "binomial_cascade", "--m", "12", "-o", t / "gen"}).code == 0);
    const auto series = t / "gen/binomial_cascade.csv";
    REQUIRE(fs::exists(series));
    const auto r = run({"mfdfa", series, "--shuffle", "-o", t / "mf"});
    REQUIRE(r.code == 0);
    const auto s = read_json(t / "mf/summary.json");
    CHECK(s["n_samples"] == 4096);
    CHECK(s["spectrum"]["width"].get<double>() > 0.0);
    CHECK(s.contains("shuffled"));
    CHECK(fs::exists(t / "mf/fluctuation.csv"));
    CHECK(fs::exists(t / "mf/shuffled_spectrum.csv"));
}

TEST_CASE("cli: epps on a generated triangle") {
    Scratch t("epps");
    REQUIRE(run({"synth", "--kind", "triangle_consistent_rates", "--length", "60001", "-o", t / "gen"}).code == 0);
    const auto r = run({"epps", "--triple", t / "gen/triangle_consistent_rates_0.csv",
                        t / "gen/triangle_consistent_rates_1.csv", t / "gen/triangle_consistent_rates_2.csv",
                        "--triangle", "--dt", "1,2,4,8,16,32", "-o", t / "ep"});
    REQUIRE(r.code == 0);
    std::ifstream in(t / "ep/epps.csv");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("dt,", 0) == 0) continue;
        std::vector<double> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cols.push_back(std::stod(cell));
        REQUIRE(cols.size() == 7);
        CHECK(std::fabs(cols[4]) <= 1e-10);
        CHECK(std::fabs(cols[5] - 3.0) <= 1e-8);
        ++rows;
    }
    CHECK(rows == 6);
}

TEST_CASE("cli: config file values, flag overrides and unknown keys") {
    Scratch t("config");
    {
        std::ofstream c(t / "cfg.json");
        c << R"({"schema_version": 1, "command": "synth", "params": {"kind": "ar1", "phi": 0.3, "length": 500}})";
    }
    REQUIRE(run({"synth", "--config", t / "cfg.json", "--length", "700", "-o", t / "a"}).code == 0);
    const auto r = read_json(t / "a/resolved_config.json");
    CHECK(r["params"]["kind"] == "ar1");
    CHECK(r["params"]["phi"] == 0.3);
    CHECK(r["params"]["length"] == 700);
    {
        std::ofstream c(t / "bad.json");
        c << R"({"schema_version": 1, "params": {"kind": "ar1", "phii": 0.3}})";
    }
    const auto bad = run({"synth", "--config", t / "bad.json", "-o", t / "b"});
    CHECK(bad.code == fxmf::cli::kUsageError);
    CHECK(bad.err.find("phii") != std::string::npos);
    {
        std::ofstream c(t / "other.json");
        c << R"({"schema_version": 1, "command": "mfdfa", "params": {}})";
    }
    CHECK(run({"synth", "--config", t / "other.json", "-o", t / "c"}).code == fxmf::cli::kUsageError);
}

TEST_CASE("cli: rerunning from resolved_config.json is bit-identical") {
    Scratch t("rerun");
    REQUIRE(run({"synth", "--kind", "q_gaussian_iid", "--q", "1.4", "--seed", "11", "--length", "3000", "-o", t / "a"})
                .code == 0);
    REQUIRE(run({"synth", "--config", t / "a/resolved_config.json", "-o", t / "b"}).code == 0);
    CHECK(slurp(t / "a/q_gaussian_iid.csv") == slurp(t / "b/q_gaussian_iid.csv"));
    CHECK(slurp(t / "a/resolved_config.json") == slurp(t / "b/resolved_config.json"));

    REQUIRE(run({"distfit", t / "a/q_gaussian_iid.csv", "-o", t / "d1"}).code == 0);
    REQUIRE(run({"distfit", t / "a/q_gaussian_iid.csv", "--config", t / "d1/resolved_config.json", "-o", t / "d2"})
                .code == 0);
    CHECK(slurp(t / "d1/summary.json") == slurp(t / "d2/summary.json"));
}

TEST_CASE("cli: pipeline on generated rates") {
    Scratch t("pipeline");
    const auto r = run({"pipeline", "--kind", "triangle_consistent_rates", "--length", "60001", "-o", t / "p"});
    REQUIRE(r.code == 0);
    const auto s = read_json(t / "p/summary.json");
    CHECK(s.contains("distfit"));
    CHECK(s.contains("mfdfa"));
    CHECK(s["max_abs_residual"].get<double>() <= 1e-12);
    CHECK(s["rmt"]["K"].get<int>() >= 2);  // 60001 minutes span five full weeks
}
