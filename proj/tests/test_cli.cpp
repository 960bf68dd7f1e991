#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "mfboost/scenario_io.hpp"

using namespace mfboost;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("mfboost_test_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "mfboost");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::map<std::string, std::string> key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        REQUIRE(eq != std::string::npos);
        kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return kv;
}

std::vector<TimeSeriesRecord> load_csv(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return read_csv(in);
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("run an exported preset") {
    TempDir dir("run");
    const auto scenario = dir.path / "fig2.scn";
    const auto csv = dir.path / "fig2.csv";
    REQUIRE(invoke({"preset", "fig2", "--export-scenario", scenario.string()}).code == 0);
    REQUIRE(parse_scenario([&] {
                std::ifstream in(scenario);
                std::stringstream b;
                b << in.rdbuf();
                return b.str();
            }()) == preset("fig2"));

    const auto r = invoke({"run", scenario.string(), "-o", csv.string(), "--plot"});
    CHECK(r.code == 0);
    const auto kv = key_values(r.out);
    for (const char* key : {"steady_state_error", "settled", "settling_time", "max_deviation",
                            "mode_switches", "records", "csv", "plot_script"}) {
        CAPTURE(key);
        CHECK(kv.count(key) == 1);
    }
    CHECK(kv.at("records") == "1001");
    CHECK(fs::exists(csv));
    CHECK(fs::exists(dir.path / "fig2.gp"));
    CHECK(load_csv(csv) == run_closed_loop(preset("fig2")));
}

TEST_CASE("run error paths") {
    TempDir dir("runerr");
    const auto missing = invoke({"run", (dir.path / "nope.scn").string(), "-o", "x.csv"});
    CHECK(missing.code == 1);
    CHECK_FALSE(missing.err.empty());

    const auto bad = dir.path / "bad.scn";
    write_text(bad, "[controller]\n\nalpha = 0\n");
    const auto r = invoke({"run", bad.string(), "-o", (dir.path / "x.csv").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("line 3: alpha must be nonzero") != std::string::npos);

    const auto diverging = dir.path / "diverge.scn";
    write_text(diverging, "[plant]\nl = 1e-300\n[sim]\nt_end = 0.01\n");
    CHECK(invoke({"run", diverging.string(), "-o", (dir.path / "d.csv").string()}).code == 2);
}

TEST_CASE("preset verb") {
    TempDir dir("preset");
    SUBCASE("fig3 load step in the R column") {
        const auto csv = dir.path / "fig3.csv";
        REQUIRE(invoke({"preset", "fig3", "-o", csv.string()}).code == 0);
        const auto rows = load_csv(csv);
        for (const auto& row : rows) {
            REQUIRE(row.resistance == (row.t >= 0.06 - 1e-12 ? 50.0 : 100.0));
        }
        CHECK(rows.front().resistance == 100.0);
        CHECK(rows.back().resistance == 50.0);
    }
    SUBCASE("fig5 load step in the R column") {
        const auto csv = dir.path / "fig5.csv";
        REQUIRE(invoke({"preset", "fig5", "-o", csv.string()}).code == 0);
        for (const auto& row : load_csv(csv)) {
            REQUIRE(row.resistance == (row.t >= 0.01 - 1e-12 ? 200.0 : 100.0));
        }
    }
    SUBCASE("plot script carries the event marker") {
        const auto csv = dir.path / "fig4.csv";
        REQUIRE(invoke({"preset", "fig4", "-o", csv.string(), "--plot"}).code == 0);
        std::ifstream gp(dir.path / "fig4.gp");
        std::stringstream text;
        text << gp.rdbuf();
        CHECK(text.str().find("set arrow from 0.06,") != std::string::npos);
        CHECK(text.str().find(csv.string()) != std::string::npos);
    }
    CHECK(invoke({"preset", "fig9", "-o", (dir.path / "x.csv").string()}).code == 1);
    CHECK(invoke({"preset", "fig2"}).code == 1);
    CHECK(invoke({"preset", "fig2", "-o", "a.csv", "--export-scenario", "b.scn"}).code == 1);
}

TEST_CASE("sweep verb") {
    TempDir dir("sweep");
    const auto out_dir = dir.path / "r";
    const auto r = invoke({"sweep", "--preset", "fig2", "--param", "r", "--from", "50", "--to",
                           "200", "--steps", "4", "--out-dir", out_dir.string(), "-j", "2"});
    CHECK(r.code == 0);
    for (const char* name : {"r_50.csv", "r_100.csv", "r_150.csv", "r_200.csv"}) {
        CAPTURE(name);
        CHECK(fs::exists(out_dir / name));
    }
    std::ifstream summary(out_dir / "summary.csv");
    std::vector<std::string> lines;
    for (std::string line; std::getline(summary, line);) lines.push_back(line);
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] ==
          "param,value,steady_state_error,settled,settling_time,max_deviation,mode_switches,csv");
    CHECK(lines[2].rfind("r,100,", 0) == 0);

    // Each CSV is the run that an explicit scenario would produce.
    Scenario s = preset("fig2");
    s.plant.resistance = 150.0;
    CHECK(load_csv(out_dir / "r_150.csv") == run_closed_loop(s));

    const std::vector<std::string> base{"sweep", "--preset", "fig2", "--from", "1", "--to", "2",
                                        "--out-dir", (dir.path / "x").string()};
    auto with = [&](std::vector<std::string> extra) {
        auto args = base;
        args.insert(args.end(), extra.begin(), extra.end());
        return invoke(args).code;
    };
    CHECK(with({"--param", "tau", "--steps", "3"}) == 1);
    CHECK(with({"--param", "kp", "--steps", "1"}) == 1);
    CHECK(with({"--param", "kp", "--steps", "2", "--scenario", "a.scn"}) == 1);
}

TEST_CASE("validate verb") {
    const auto first = invoke({"validate"});
    CHECK(first.code == 0);
    CHECK(first.out.find("5 of 5 checks passed") != std::string::npos);
    CHECK(invoke({"validate"}).out == first.out);

    const auto perturbed = invoke({"validate", "--perturb-alpha", "1e-6"});
    CHECK(perturbed.code == 3);
    CHECK(perturbed.err.find("control_law_oracle") != std::string::npos);

    std::ostringstream out, err;
    ValidationOptions o;
    o.alpha_perturbation = 1e-3;
    CHECK(cli::cmd_validate(o, out, err) == 3);
}

TEST_CASE("usage errors and help") {
    CHECK(invoke({}).code == 1);
    CHECK(invoke({"simulate"}).code == 1);
    CHECK(invoke({"run"}).code == 1);
    const auto help = invoke({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("sweep") != std::string::npos);
}

TEST_CASE("output directory override") {
    TempDir dir("envout");
    ::setenv("MFBOOST_OUTPUT_DIR", dir.path.c_str(), 1);
    const auto r = invoke({"preset", "fig2", "-o", "relative.csv"});
    ::unsetenv("MFBOOST_OUTPUT_DIR");
    CHECK(r.code == 0);
    CHECK(fs::exists(dir.path / "relative.csv"));
}
