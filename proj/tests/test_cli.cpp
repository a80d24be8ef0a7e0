#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ktopical/app.hpp"

using namespace ktopical;
using namespace ktopical::app;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("ktopical_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write_config(const std::string& text, const std::string& name = "config.json") {
        const fs::path p = dir_ / name;
        std::ofstream(p) << text;
        return p;
    }

    int run(Command cmd, const fs::path& config, const fs::path& out, int jobs = 1,
            std::optional<std::uint64_t> seed = {}) {
        CommandOptions o;
        o.config = config;
        o.out_dir = out;
        o.jobs = jobs;
        o.seed = seed;
        err_.str("");
        return run_command(cmd, o, log_, err_);
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    fs::path dir_;
    std::ostringstream log_, err_;
};

const char* averaging_config = R"({
  "version": 1,
  "model": {"type": "linear_consensus", "time_domain": "discrete", "epsilon": 0.25,
            "graph": {"n": 3, "edges": [[1,2],[1,3],[2,1],[2,3],[3,1],[3,2]]}},
  "initial": [-1, 0.5, 2]
})";

}  // namespace

TEST_F(CliTest, VerifyWritesReportAndExitsZeroForKTopical) {
    const auto cfg = write_config(averaging_config);
    EXPECT_EQ(run(Command::verify, cfg, dir_ / "out"), 0) << err_.str();
    const auto j = json::parse(slurp(dir_ / "out" / "verify.json"));
    EXPECT_EQ(j["properties"]["k_topical"], "pass");
    EXPECT_EQ(j["plan"]["seed"], 42);
    EXPECT_EQ(j["time_domain"], "discrete");
}

TEST_F(CliTest, VerifyExitsTwoWhenACheckFails) {
    const auto cfg = write_config(R"({"version": 1, "model": {"type": "swap"}})");
    EXPECT_EQ(run(Command::verify, cfg, dir_ / "out"), 2);
    const auto j = json::parse(slurp(dir_ / "out" / "verify.json"));
    EXPECT_EQ(j["properties"]["type_k"], "fail");
    bool has_witness = false;
    for (const auto& c : j["checks"])
        if (c["name"] == "diagonal_positive") has_witness = !c["witnesses"].empty();
    EXPECT_TRUE(has_witness);
}

TEST_F(CliTest, SeedOverrideIsRecorded) {
    const auto cfg = write_config(averaging_config);
    EXPECT_EQ(run(Command::verify, cfg, dir_ / "out", 1, 7), 0);
    EXPECT_EQ(json::parse(slurp(dir_ / "out" / "verify.json"))["plan"]["seed"], 7);
}

TEST_F(CliTest, UnknownKeyIsAConfigErrorAndWritesNothing) {
    const auto cfg = write_config(R"({"version": 1, "model": {"type": "swap", "colour": 3}})");
    EXPECT_EQ(run(Command::verify, cfg, dir_ / "out"), 1);
    EXPECT_NE(err_.str().find("model.colour"), std::string::npos) << err_.str();
    EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(CliTest, TopLevelUnknownKeyAndVersion) {
    EXPECT_EQ(run(Command::verify, write_config(R"({"version": 1, "model": {"type": "swap"}, "x": 1})"),
                  dir_ / "out"), 1);
    EXPECT_NE(err_.str().find("'x'"), std::string::npos);
    EXPECT_EQ(run(Command::verify, write_config(R"({"version": 2, "model": {"type": "swap"}})"),
                  dir_ / "out"), 1);
    EXPECT_EQ(run(Command::verify, write_config("{not json"), dir_ / "out"), 1);
    EXPECT_EQ(run(Command::verify, dir_ / "missing.json", dir_ / "out"), 1);
}

TEST_F(CliTest, EpsilonAboveBoundIsRefused) {
    const auto cfg = write_config(R"({
      "version": 1,
      "model": {"type": "linear_consensus", "time_domain": "discrete", "epsilon": 0.6,
                "graph": {"n": 3, "edges": [[1,2],[1,3],[2,1],[2,3],[3,1],[3,2]]}},
      "initial": [0, 1, 2]})");
    EXPECT_EQ(run(Command::consensus, cfg, dir_ / "out"), 1);
    EXPECT_NE(err_.str().find("0.5"), std::string::npos) << err_.str();
    EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(CliTest, SimulateWritesTrajectoryAndReport) {
    const auto cfg = write_config(R"({"version": 1, "model": {"type": "max_plus",
        "matrix": [[0, -1], [-1, 0]]}, "initial": [0, 5]})");
    EXPECT_EQ(run(Command::simulate, cfg, dir_ / "out"), 0);
    const auto j = json::parse(slurp(dir_ / "out" / "simulation.json"));
    EXPECT_EQ(j["outcome"], "converged");
    EXPECT_EQ(j["limit"], json::array({4.0, 5.0}));
    const std::string csv = slurp(dir_ / "out" / "trajectory.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x_1,x_2");
    EXPECT_NE(csv.find("\n1,4,5\n"), std::string::npos);
}

TEST_F(CliTest, SimulateNeedsInitialState) {
    EXPECT_EQ(run(Command::simulate, write_config(R"({"version": 1, "model": {"type": "swap"}})"),
                  dir_ / "out"), 1);
    EXPECT_EQ(run(Command::simulate,
                  write_config(R"({"version": 1, "model": {"type": "swap"}, "initial": [1, 2, 3]})"),
                  dir_ / "out"), 1);
}

TEST_F(CliTest, ConsensusReportsConditionFourFailure) {
    const auto cfg = write_config(R"({"version": 1,
      "model": {"type": "linear_consensus", "time_domain": "continuous",
                "graph": {"n": 4, "edges": [[1,2],[2,1],[3,4],[4,3]]}},
      "initial": [0, 1, 3, 5]})");
    EXPECT_EQ(run(Command::consensus, cfg, dir_ / "out"), 2);
    const auto j = json::parse(slurp(dir_ / "out" / "consensus.json"));
    EXPECT_EQ(j["conditions"]["iv_globally_reachable_node"]["verdict"], "fail");
    EXPECT_EQ(j["outcome"], "equilibrium_non_consensus");
}

TEST_F(CliTest, ConsensusWithGraphFileRelativeToConfig) {
    std::ofstream(dir_ / "g.txt") << "n 3\n1 2\n2 3\n3 1\n";
    const auto cfg = write_config(R"({"version": 1,
      "model": {"type": "saturated_consensus", "time_domain": "discrete", "epsilon": 0.3,
                "graph_file": "g.txt"},
      "initial": [-2, 0.5, 1.5]})");
    EXPECT_EQ(run(Command::consensus, cfg, dir_ / "out"), 0) << err_.str();
    const auto j = json::parse(slurp(dir_ / "out" / "consensus.json"));
    EXPECT_EQ(j["outcome"], "consensus");
    EXPECT_LT(j["width"]["final"].get<double>(), 1e-9);
}

TEST_F(CliTest, ConsensusRejectsNonMultiAgentModel) {
    EXPECT_EQ(run(Command::consensus,
                  write_config(R"({"version": 1, "model": {"type": "swap"}, "initial": [0, 1]})"),
                  dir_ / "out"), 1);
}

TEST_F(CliTest, SweepIsDeterministicAcrossJobCounts) {
    const auto cfg = write_config(R"({"version": 1,
      "model": {"type": "saturated_consensus", "time_domain": "continuous",
                "graph": {"n": 3, "edges": [[1,2],[2,3],[3,1]]}},
      "time": {"horizon": 40},
      "sweep": {"axis": "seed", "values": [1, 2, 3, 4, 5]}})");
    EXPECT_EQ(run(Command::sweep, cfg, dir_ / "a", 1), 0) << err_.str();
    EXPECT_EQ(run(Command::sweep, cfg, dir_ / "b", 4), 0);
    EXPECT_EQ(slurp(dir_ / "a" / "sweep.csv"), slurp(dir_ / "b" / "sweep.csv"));
    EXPECT_EQ(slurp(dir_ / "a" / "sweep.json"), slurp(dir_ / "b" / "sweep.json"));
    const std::string csv = slurp(dir_ / "a" / "sweep.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "seed,outcome,iterations_or_time,final_width,final_residual,gap");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
}

TEST_F(CliTest, EpsilonSweepRows) {
    const auto cfg = write_config(R"({"version": 1,
      "model": {"type": "saturated_consensus", "time_domain": "discrete", "epsilon": 0.1,
                "graph": {"n": 2, "edges": [[1,2],[2,1]]}},
      "initial": [-1, 1],
      "sweep": {"axis": "epsilon", "values": [0.1, 0.3, 0.45]}})");
    EXPECT_EQ(run(Command::sweep, cfg, dir_ / "out", 2), 0);
    const auto j = json::parse(slurp(dir_ / "out" / "sweep.json"));
    ASSERT_EQ(j["rows"].size(), 3u);
    for (const auto& r : j["rows"]) EXPECT_EQ(r["outcome"], "consensus");
    EXPECT_DOUBLE_EQ(j["rows"][1]["epsilon"].get<double>(), 0.3);
}

TEST_F(CliTest, AlphaSweepGapWithinLogBound) {
    const auto cfg = write_config(R"({"version": 1,
      "model": {"type": "smooth_max_plus", "alpha": 1, "matrix": [[0, -1], [-1, 0]]},
      "time": {"horizon": 50}, "initial": [0, 5],
      "sweep": {"axis": "alpha", "values": [1, 10, 100]}})");
    EXPECT_EQ(run(Command::sweep, cfg, dir_ / "out"), 0) << err_.str();
    const auto j = json::parse(slurp(dir_ / "out" / "sweep.json"));
    for (const auto& r : j["rows"])
        EXPECT_LE(r["gap"].get<double>(), std::log(2.0) / r["alpha"].get<double>() + 1e-12);
}

TEST_F(CliTest, SweepConfigErrors) {
    EXPECT_EQ(run(Command::sweep, write_config(R"({"version": 1, "model": {"type": "swap"},
        "sweep": {"axis": "seed", "values": []}})"), dir_ / "out"), 1);
    EXPECT_EQ(run(Command::sweep, write_config(R"({"version": 1, "model": {"type": "swap"},
        "sweep": {"axis": "gamma", "values": [1]}})"), dir_ / "out"), 1);
    EXPECT_EQ(run(Command::sweep, write_config(R"({"version": 1, "model": {"type": "swap"}})"),
                  dir_ / "out"), 1);
    // One refused gain aborts the whole sweep before any output.
    EXPECT_EQ(run(Command::sweep, write_config(R"({"version": 1,
      "model": {"type": "linear_consensus", "time_domain": "discrete", "epsilon": 0.1,
                "graph": {"n": 2, "edges": [[1,2],[2,1]]}},
      "initial": [0, 1], "sweep": {"axis": "epsilon", "values": [0.5, 1.5]}})"), dir_ / "out"), 1);
    EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(CliTest, ShippedConfigsLoad) {
    for (const char* name : {"linear_ct.json", "averaging_dt.json", "max_plus.json", "swap.json",
                             "kuramoto.json", "shapley.json", "saturated_cycle_dt.json"}) {
        CommandOptions o;
        o.config = fs::path(KTOPICAL_CONFIG_DIR) / name;
        EXPECT_NO_THROW(load_config(o)) << name;
    }
}

#ifndef _WIN32
TEST_F(CliTest, BinaryExitCodes) {
    const std::string exe = KTOPICAL_CLI;
    const std::string cfgdir = KTOPICAL_CONFIG_DIR;
    auto code = [](const std::string& cmd) {
        const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    };
    const std::string out = " --out " + (dir_ / "bin").string();
    EXPECT_EQ(code(exe + " verify --config " + cfgdir + "/averaging_dt.json" + out), 0);
    EXPECT_EQ(code(exe + " verify --config " + cfgdir + "/swap.json" + out), 2);
    EXPECT_EQ(code(exe + " consensus --config " + cfgdir + "/no_root_4.json" + out), 2);
    EXPECT_EQ(code(exe + " sweep --jobs 2 --config " + cfgdir + "/saturated_cycle_dt.json" + out), 0);
    EXPECT_EQ(code(exe + " verify --config " + cfgdir + "/does_not_exist.json" + out), 1);
    EXPECT_EQ(code(exe + " frobnicate"), 1);
    EXPECT_EQ(code(exe), 1);
    EXPECT_EQ(code(exe + " sweep --jobs 0 --config " + cfgdir + "/saturated_cycle_dt.json" + out), 1);
}
#endif

TEST_F(CliTest, MissingGraphFileIsAConfigError) {
    const auto cfg = write_config(R"({"version": 1, "model": {"type": "linear_consensus",
        "time_domain": "continuous", "graph_file": "nowhere.graph"}})");
    EXPECT_EQ(run(Command::verify, cfg, dir_ / "out"), 1);
    EXPECT_NE(err_.str().find("model.graph_file"), std::string::npos) << err_.str();
}

TEST_F(CliTest, SimulateSwapAndShift) {
    EXPECT_EQ(run(Command::simulate,
                  write_config(R"({"version": 1, "model": {"type": "swap"}, "initial": [0, 1]})"),
                  dir_ / "swap"), 0);
    const auto j = json::parse(slurp(dir_ / "swap" / "simulation.json"));
    EXPECT_EQ(j["outcome"], "periodic");
    EXPECT_EQ(j["period"], 2);
    EXPECT_EQ(run(Command::simulate,
                  write_config(R"({"version": 1, "model": {"type": "shift", "n": 1, "c": 1},
                                   "time": {"horizon": 200}, "initial": [0]})"),
                  dir_ / "shift"), 0);
    const auto k = json::parse(slurp(dir_ / "shift" / "simulation.json"));
    EXPECT_TRUE(k["outcome"] == "diverged" || k["outcome"] == "horizon_exhausted");
}

TEST_F(CliTest, ConsensusTanhPairValue) {
    const auto cfg = write_config(R"({"version": 1,
      "model": {"type": "saturated_consensus", "time_domain": "continuous",
                "graph": {"n": 2, "edges": [[1,2],[2,1]]}},
      "initial": [-1, 1]})");
    EXPECT_EQ(run(Command::consensus, cfg, dir_ / "out"), 0);
    const auto j = json::parse(slurp(dir_ / "out" / "consensus.json"));
    EXPECT_NEAR(j["consensus_value"].get<double>(), 0.0, 1e-6);
    for (const auto& [k, v] : j["conditions"].items()) EXPECT_EQ(v["verdict"], "pass") << k;
}
