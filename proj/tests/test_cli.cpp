#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "casym/cli.hpp"
#include "casym/csv.hpp"

using namespace casym;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    args.insert(args.begin(), "casym");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("casym_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string config(const std::string& name) { return (fs::path(CASYM_SOURCE_DIR) / "configs" / name).string(); }

} // namespace

TEST_CASE("simulate is byte-identical across invocations") {
    fs::path a = scratch("sim_a"), b = scratch("sim_b");
    for (const auto& dir : {a, b}) {
        auto r = cli({"simulate", "--config", config("default.json"), "--seed", "1", "--iters", "300", "--set",
                      "population.n_users=300", "--out", dir.string()});
        REQUIRE(r.code == 0);
    }
    CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
    CHECK(slurp(a / "histogram.csv") == slurp(b / "histogram.csv"));
    CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));

    CsvTable t = read_csv(a / "trajectory.csv");
    CHECK(t.header == std::vector<std::string>{"step", "pi_0", "pi_1", "meanx_0", "meanx_1"});
    CHECK(t.rows.size() == 301);
    CsvTable h = read_csv(a / "histogram.csv");
    CHECK(h.header == std::vector<std::string>{"bin_0", "bin_1", "count"});
    long total = 0;
    for (const auto& row : h.rows) total += std::stol(row[2]);
    CHECK(total == 300);

    auto m = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(m["seed"] == 1);
    CHECK(m["subcommand"] == "simulate");
    CHECK(m["config"]["population"]["n_users"] == 300);
    CHECK(m["config"]["run"]["n_iter"] == 300);
    CHECK(m["overrides"][0] == "population.n_users=300");

    fs::path c = scratch("sim_c");
    REQUIRE(cli({"simulate", "--seed", "2", "--iters", "300", "--set", "population.n_users=300", "--out",
                 c.string()})
                .code == 0);
    CHECK(slurp(a / "trajectory.csv") != slurp(c / "trajectory.csv"));
}

TEST_CASE("thread count does not change results") {
    fs::path a = scratch("ens_a"), b = scratch("ens_b");
    std::vector<std::string> base{"ensemble", "--runs", "3", "--iters", "400", "--set", "population.n_users=200"};
    auto ra = base, rb = base;
    ra.insert(ra.end(), {"--threads", "1", "--out", a.string()});
    rb.insert(rb.end(), {"--threads", "3", "--out", b.string()});
    REQUIRE(cli(ra).code == 0);
    REQUIRE(cli(rb).code == 0);
    CHECK(slurp(a / "ensemble.csv") == slurp(b / "ensemble.csv"));
    CHECK(slurp(a / "ensemble_runs.csv") == slurp(b / "ensemble_runs.csv"));

    fs::path e = scratch("ens_env");
    setenv("ASYM_SIM_THREADS", "2", 1);
    auto re = base;
    re.insert(re.end(), {"--out", e.string()});
    CHECK(cli(re).code == 0);
    CHECK(slurp(a / "ensemble.csv") == slurp(e / "ensemble.csv"));
    setenv("ASYM_SIM_THREADS", "many", 1);
    CHECK(cli(re).code == 1);
    unsetenv("ASYM_SIM_THREADS");
}

TEST_CASE("exit statuses") {
    fs::path d = scratch("codes");
    CHECK(cli({}).code == 1);
    CHECK(cli({"simulate", "--bogus"}).code == 1);
    CHECK(cli({"nosuch"}).code == 1);
    CHECK(cli({"simulate", "--config", "/nonexistent.json", "--out", d.string()}).code == 1);
    auto r = cli({"simulate", "--set", "influencers.0.post_freq=0.9", "--out", d.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("influencers[].post_freq") != std::string::npos);
    CHECK(cli({"--version"}).code == 0);
    CHECK(cli({"simulate", "--help"}).code == 0);

    fs::path cfg = d / "single.json";
    std::ofstream(cfg) << R"({"space": {"dims": 1},
        "influencers": [{"opinion": [0.7], "post_freq": 1.0}],
        "population": {"init": "point", "point": [0.4]},
        "kernels": {"rho": 0.0, "feedback": "gaussian", "feedback_scale": 1e-300},
        "solver": {"density_nodes": 101}})";
    auto deg = cli({"fp-density", "--config", cfg.string(), "--out", d.string()});
    CHECK(deg.code == 2);
    CHECK(deg.err.find("variance") != std::string::npos);

    auto stuck = cli({"fluid", "--config", config("appendixD.json"), "--set", "kernels.rho=0.3", "--set",
                      "solver.max_outer=1", "--out", d.string()});
    CHECK(stuck.code == 2);
    CHECK(fs::exists(d / "fluid.csv"));
    CHECK(cli({"fluid", "--out", d.string()}).code == 1);  // 2-D default space
}

TEST_CASE("fpa-scan row") {
    fs::path d = scratch("fpa");
    auto r = cli({"fpa-scan", "--config", config("appendixD.json"), "--set", "kernels.rho=0.3", "--out", d.string()});
    REQUIRE(r.code == 0);
    CsvTable t = read_csv(d / "fpa.csv");
    CHECK(t.header == std::vector<std::string>{"rho", "pi1_fpa", "xbar", "n_fixed_points", "stable_points"});
    REQUIRE(t.rows.size() == 1);
    CHECK(std::stod(t.rows[0][0]) == 0.3);
    CHECK(std::abs(std::stod(t.rows[0][1]) - 0.728) < 0.002);

    fs::path all = scratch("fpa_all");
    REQUIRE(cli({"fpa-scan", "--config", config("appendixD.json"), "--out", all.string()}).code == 0);
    CHECK(read_csv(all / "fpa.csv").rows.size() == 9);
    fs::path some = scratch("fpa_some");
    REQUIRE(cli({"fpa-scan", "--config", config("appendixD.json"), "--rho", "0", "1", "--out", some.string()}).code ==
            0);
    CHECK(read_csv(some / "fpa.csv").rows.size() == 2);
}

TEST_CASE("fluid and fp-density outputs") {
    fs::path d = scratch("fluid");
    REQUIRE(cli({"fluid", "--config", config("appendixD.json"), "--out", d.string()}).code == 0);
    CsvTable p = read_csv(d / "fluid_popularity.csv");
    CHECK(std::abs(std::stod(p.rows[1][1]) - 0.684) < 0.001);
    REQUIRE(cli({"fp-density", "--config", config("appendixD.json"), "--set", "kernels.rho=0.3", "--set",
                 "solver.density_nodes=201", "--out", d.string()})
                .code == 0);
    CsvTable f = read_csv(d / "density.csv");
    CHECK(f.header == std::vector<std::string>{"z", "x", "f"});
    CHECK(f.rows.size() == 201);
    CHECK(read_csv(d / "equilibrium.csv").rows.size() == 1);
}

TEST_CASE("analyze") {
    fs::path d = scratch("analyze");
    fs::path posts = d / "posts.csv";
    std::ofstream(posts) << "influencer_id,timestamp,topic\n"
                            "solo,2020-01-01T00:00:00Z,politics\n"
                            "solo,2020-01-02T00:00:00Z,politics\n"
                            "solo,2020-01-03T00:00:00Z,politics\n"
                            "duo,2020-01-01T00:00:00Z,a\n"
                            "duo,2020-01-02T00:00:00Z,b\n"
                            "duo,2020-01-03T00:00:00Z,a\n"
                            "duo,2020-01-04T00:00:00Z,b\n"
                            "duo,2020-01-05T00:00:00Z,a\n";
    auto r = cli({"analyze", "--posts", posts.string(), "--max-lag", "2", "--out", d.string()});
    REQUIRE(r.code == 0);
    CsvTable c = read_csv(d / "consistency.csv");
    REQUIRE(c.rows.size() == 2);
    std::size_t id = c.column("influencer_id"), cons = c.column("consistency");
    for (const auto& row : c.rows) {
        if (row[id] == "solo") CHECK(std::stod(row[cons]) == 1.0);
        if (row[id] == "duo") CHECK(std::stod(row[cons]) == doctest::Approx(0.6));
    }
    CsvTable a = read_csv(d / "acov.csv");
    CHECK(a.header == std::vector<std::string>{"influencer_id", "topic", "lag", "value"});
    CHECK(a.rows.size() == 3);
    CHECK(cli({"analyze", "--out", d.string()}).code == 1);
}

TEST_CASE("sweep, case-study and sensitivity write their tables") {
    fs::path d = scratch("exp");
    REQUIRE(cli({"sweep", "--config", config("frequency_sweep.json"), "--runs", "2", "--iters", "200", "--set",
                 "population.n_users=50", "--set", "sweep.values=[0.2,0.5]", "--out", d.string()})
                .code == 0);
    CsvTable s = read_csv(d / "sweep.csv");
    CHECK(s.header == std::vector<std::string>{"param", "value", "run", "pi_0", "pi_1", "meanx_0", "meanx_1"});
    CHECK(s.rows.size() == 4);

    REQUIRE(cli({"case-study", "--config", config("case_study.json"), "--runs", "2", "--set",
                 "population.n_users=100", "--out", d.string()})
                .code == 0);
    CsvTable cs = read_csv(d / "case_study.csv");
    CHECK(cs.header == std::vector<std::string>{"week", "pi_conte", "ci_low", "ci_high"});
    CHECK(cs.rows.size() == 12);

    REQUIRE(cli({"sensitivity", "--config", config("case_study.json"), "--runs", "1", "--set",
                 "population.n_users=40", "--out", d.string()})
                .code == 0);
    CHECK(read_csv(d / "sensitivity_summary.csv").rows.size() == 24);
    CHECK(read_csv(d / "sensitivity.csv").rows.size() == 24 * 12);
    CHECK(cli({"sweep", "--out", d.string()}).code == 1);
}

TEST_CASE("plot-data reshapes to long form") {
    fs::path d = scratch("plot");
    fs::path in = d / "wide.csv";
    std::ofstream(in) << "step,pi_0,pi_1\n0,0.5,0.5\n10,0.4,0.6\n";
    REQUIRE(cli({"plot-data", "--input", in.string(), "--out", d.string()}).code == 0);
    CsvTable t = read_csv(d / "wide_long.csv");
    CHECK(t.header == std::vector<std::string>{"step", "variable", "value"});
    REQUIRE(t.rows.size() == 4);
    CHECK(t.rows[3] == std::vector<std::string>{"10", "pi_1", "0.6"});
}
