#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "termfit/cli.hpp"

using namespace termfit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("termfit_test_" + std::to_string(Catch::rngSeed()) + "_" +
                std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string str(const std::string& name = "") const {
        return (name.empty() ? path : path / name).string();
    }
    static inline int counter = 0;
};

int run(const std::vector<std::string>& args) {
    std::ostringstream sink;
    return cli::run_cli(args, sink);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// synth -> fit pipeline in one temp dir; returns the dir.
void make_quotes(const TempDir& dir, const std::string& days = "6",
                 const std::string& noise_bp = "1.0") {
    REQUIRE(run({"synth", "--out", dir.str(), "--days", days, "--seed", "9",
                 "--noise-bp", noise_bp, "--model", "ns", "--lambda1", "2.0"}) == 0);
    REQUIRE(fs::exists(dir.path / "synthetic_quotes.csv"));
    REQUIRE(fs::exists(dir.path / "synthetic_truth.json"));
}

const std::vector<std::string> kQuickGrid = {"--grid-min", "0.5", "--grid-max", "4.0",
                                             "--grid-step", "0.25"};

std::vector<std::string> with_grid(std::vector<std::string> args) {
    args.insert(args.end(), kQuickGrid.begin(), kQuickGrid.end());
    return args;
}

}  // namespace

TEST_CASE("cli fit writes one beta file per method plus diagnostics", "[cli]") {
    TempDir dir;
    make_quotes(dir);
    const int code = run(with_grid({"fit", "--input", dir.str("synthetic_quotes.csv"),
                                    "--out", dir.str("out"), "--model", "ns",
                                    "--methods", "all"}));
    REQUIRE(code == 0);
    for (const std::string method : {"ols", "ridge", "raise"}) {
        const fs::path f = dir.path / "out" / ("betas_ns_" + method + ".csv");
        REQUIRE(fs::exists(f));
        const std::string content = slurp(f);
        CHECK(content.find("date,lambda1,lambda2,beta0") == 0);
        CHECK(std::count(content.begin(), content.end(), '\n') == 7);  // header + 6 days
    }
    CHECK(fs::exists(dir.path / "out" / "diagnostics_ns.csv"));
    CHECK(fs::exists(dir.path / "out" / "run_summary.json"));
}

TEST_CASE("cli fit is deterministic", "[cli]") {
    TempDir dir;
    make_quotes(dir);
    REQUIRE(run(with_grid({"fit", "-i", dir.str("synthetic_quotes.csv"), "-o",
                           dir.str("a"), "--model", "ns"})) == 0);
    REQUIRE(run(with_grid({"fit", "-i", dir.str("synthetic_quotes.csv"), "-o",
                           dir.str("b"), "--model", "ns"})) == 0);
    for (const std::string name :
         {"betas_ns_ols.csv", "betas_ns_ridge.csv", "betas_ns_raise.csv",
          "diagnostics_ns.csv"})
        REQUIRE(slurp(dir.path / "a" / name) == slurp(dir.path / "b" / name));
}

TEST_CASE("cli evaluate writes the report tables and plot data", "[cli]") {
    TempDir dir;
    make_quotes(dir, "8");
    const int code = run(with_grid({"evaluate", "-i", dir.str("synthetic_quotes.csv"),
                                    "-o", dir.str("out"), "--model", "ns", "--lags", "2"}));
    REQUIRE(code == 0);
    for (const std::string name :
         {"report_tables.csv", "report_tables.json", "plot_long_rate_ns.csv",
          "plot_short_rate_ns.csv", "plot_long_rate_se_ns.csv", "plot_swap30_ns.csv"}) {
        INFO(name);
        REQUIRE(fs::exists(dir.path / "out" / name));
    }
    const std::string report = slurp(dir.path / "out" / "report_tables.csv");
    CHECK(report.find("# descriptive") != std::string::npos);
    CHECK(report.find("# in-sample mse") != std::string::npos);
    CHECK(report.find("# out-of-sample 30y mae") != std::string::npos);
    CHECK(report.find("# pairwise mae tests") != std::string::npos);

    const auto json = nlohmann::json::parse(slurp(dir.path / "out" / "report_tables.json"));
    REQUIRE(json["models"].size() == 1);
    CHECK(json["models"][0]["model"] == "ns");
    CHECK(json["models"][0]["mse_percent2"].contains("ols"));
}

TEST_CASE("cli evaluate without holdouts omits the mae section", "[cli]") {
    TempDir dir;
    make_quotes(dir);
    // strip the 30y rows
    std::ifstream in(dir.str("synthetic_quotes.csv"));
    std::ofstream out(dir.str("no_holdout.csv"));
    std::string line;
    while (std::getline(in, line))
        if (line.find(",30Y,") == std::string::npos) out << line << '\n';
    out.close();

    const int code = run(with_grid({"evaluate", "-i", dir.str("no_holdout.csv"), "-o",
                                    dir.str("out"), "--model", "ns"}));
    REQUIRE(code == 0);
    const auto json = nlohmann::json::parse(slurp(dir.path / "out" / "report_tables.json"));
    CHECK_FALSE(json["models"][0].contains("mae_percent"));
    CHECK(json["models"][0]["ttests"].empty());
}

TEST_CASE("cli diagnose writes the collinearity dump", "[cli]") {
    TempDir dir;
    make_quotes(dir);
    REQUIRE(run(with_grid({"diagnose", "-i", dir.str("synthetic_quotes.csv"), "-o",
                           dir.str("out"), "--model", "ns"})) == 0);
    const std::string dump = slurp(dir.path / "out" / "diagnostics_ns.csv");
    CHECK(dump.find("date,lambda1,lambda2,cn,severity") == 0);
    CHECK(dump.find("vif_slope") != std::string::npos);
}

TEST_CASE("cli exit codes", "[cli]") {
    SECTION("missing input file") {
        TempDir dir;
        CHECK(run({"fit", "-i", dir.str("absent.csv"), "-o", dir.str("out")}) == 2);
        CHECK(fs::exists(dir.path / "out" / "errors.json"));
    }
    SECTION("header-only file has no data") {
        TempDir dir;
        std::ofstream(dir.str("empty.csv")) << "date,instrument,maturity,rate,unit\n";
        CHECK(run({"fit", "-i", dir.str("empty.csv"), "-o", dir.str("out")}) == 2);
        // no partial artifacts
        CHECK_FALSE(fs::exists(dir.path / "out" / "betas_ns_ols.csv"));
    }
    SECTION("malformed row") {
        TempDir dir;
        std::ofstream(dir.str("bad.csv"))
            << "date,instrument,maturity,rate,unit\n2020-01-02,OIS,13M,1.0,percent\n";
        CHECK(run({"fit", "-i", dir.str("bad.csv"), "-o", dir.str("out")}) == 2);
    }
    SECTION("bad flag values") {
        TempDir dir;
        make_quotes(dir, "2");
        CHECK(run({"fit", "-i", dir.str("synthetic_quotes.csv"), "-o", dir.str("out"),
                   "--model", "nsx"}) == 2);
        CHECK(run({"fit", "-i", dir.str("synthetic_quotes.csv"), "-o", dir.str("out"),
                   "--methods", "ols,bogus"}) == 2);
        CHECK(run({"fit", "-i", dir.str("synthetic_quotes.csv"), "-o", dir.str("out"),
                   "--unit", "bp"}) == 2);
        CHECK(run({"unknown-subcommand"}) == 2);
    }
    SECTION("panel with no usable day fails calibration for fit") {
        TempDir dir;
        std::ofstream out(dir.str("ois_only.csv"));
        out << "date,instrument,maturity,rate,unit\n";
        for (int m = 1; m <= 11; ++m)
            out << "2020-01-02,OIS," << m << "M,1.0,percent\n";
        out.close();
        CHECK(run({"fit", "-i", dir.str("ois_only.csv"), "-o", dir.str("out")}) == 3);
        const auto err = nlohmann::json::parse(slurp(dir.path / "out" / "errors.json"));
        CHECK(err["code"] == 3);
    }
    SECTION("evaluation unavailable on the same panel") {
        TempDir dir;
        std::ofstream out(dir.str("ois_only.csv"));
        out << "date,instrument,maturity,rate,unit\n";
        for (int m = 1; m <= 11; ++m)
            out << "2020-01-02,OIS," << m << "M,1.0,percent\n";
        out.close();
        CHECK(run({"evaluate", "-i", dir.str("ois_only.csv"), "-o", dir.str("out")}) == 4);
    }
    SECTION("help exits zero") { CHECK(run({"--help"}) == 0); }
}

TEST_CASE("cli percent unit flag applies to unitless rows", "[cli]") {
    TempDir dir;
    {
        std::ofstream out(dir.str("pct.csv"));
        out << "date,instrument,maturity,rate,unit\n";
        for (int m = 1; m <= 11; ++m)
            out << "2020-01-02,OIS," << m << "M," << 1.0 + 0.01 * m << "\n";
        for (int y = 1; y <= 10; ++y)
            out << "2020-01-02,IRS," << y << "Y," << 1.2 + 0.05 * y << "\n";
    }
    const int code = run(with_grid({"fit", "-i", dir.str("pct.csv"), "-o", dir.str("out"),
                                    "--model", "ns", "--unit", "percent", "--methods",
                                    "ols"}));
    REQUIRE(code == 0);
    const std::string betas = slurp(dir.path / "out" / "betas_ns_ols.csv");
    // decimal-scale level coefficient: beta0 of a ~1.5% curve stays near 0.015
    CHECK(betas.find("date,") == 0);
}
