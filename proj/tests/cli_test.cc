#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fluidlb_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome run(const std::string& args) {
    const fs::path out = dir_ / "stdout.txt";
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = std::string(FLUIDLB_CLI) + " " + args + " > " + out.string() +
                            " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    Outcome o;
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.out = slurp(out);
    o.err = slurp(err);
    return o;
  }

  std::string instance() const { return std::string(FLUIDLB_DATA_DIR) + "/sym_1x2.json"; }

  fs::path dir_;
};

TEST_F(CliTest, SolvePrintsTheOptimum) {
  const Outcome o = run("solve " + instance());
  ASSERT_EQ(o.code, 0) << o.err;
  const json doc = json::parse(o.out);
  EXPECT_NEAR(doc.at("opt_value").get<double>(), 2.25, 1e-12);
}

TEST_F(CliTest, SimulateWritesTrajectoryCsv) {
  const fs::path csv = dir_ / "traj.csv";
  const Outcome o = run("simulate " + instance() + " --policy dgd --eta 0.4 --horizon 5 --out " +
                        csv.string());
  ASSERT_EQ(o.code, 0) << o.err;
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("t,N_0,N_1,", 0), 0u) << header;
  EXPECT_NO_THROW(json::parse(o.out));
}

TEST_F(CliTest, StabilityReportsTheCondition) {
  const Outcome o = run("stability " + instance() + " --eta 0.4");
  ASSERT_EQ(o.code, 0) << o.err;
  const json doc = json::parse(o.out);
  EXPECT_NEAR(doc.at("lhs_multi").get<double>(), 0.8, 1e-9);
  EXPECT_TRUE(doc.at("stable").get<bool>());
}

TEST_F(CliTest, ProjectOntoTheSimplex) {
  const Outcome o = run("project --z 0.3,0.2");
  ASSERT_EQ(o.code, 0) << o.err;
  const json doc = json::parse(o.out);
  const auto v = doc.at("x");
  EXPECT_NEAR(v.at(0).get<double>(), 0.55, 1e-15);
  EXPECT_NEAR(v.at(1).get<double>(), 0.45, 1e-15);
}

TEST_F(CliTest, MissingFileIsAUsageError) {
  const Outcome o = run("solve " + (dir_ / "missing.json").string());
  EXPECT_EQ(o.code, 2);
  const json err = json::parse(o.err);
  EXPECT_TRUE(err.contains("error"));
  EXPECT_TRUE(err.contains("message"));
}

TEST_F(CliTest, UnknownFlagIsAUsageError) {
  const Outcome o = run("solve " + instance() + " --bogus 1");
  EXPECT_EQ(o.code, 2);
  EXPECT_EQ(json::parse(o.err).at("error"), "usage");
}

TEST_F(CliTest, InfeasibleInstanceIsADomainError) {
  const fs::path path = dir_ / "overloaded.json";
  std::ofstream(path) << R"({"frontends": 1, "backends": 2,
    "arcs": [[0, 0, 1.0], [0, 1, 1.0]], "lambda": [20.0],
    "rates": [{"family": "hyperbolic", "k": 2, "s": 1},
              {"family": "hyperbolic", "k": 3, "s": 1}]})";
  const Outcome o = run("solve " + path.string());
  EXPECT_EQ(o.code, 1);
  const json err = json::parse(o.err);
  EXPECT_EQ(err.at("error"), "infeasible");
}

TEST_F(CliTest, DumpedInstancesReload) {
  const fs::path dump = dir_ / "instances";
  const Outcome o = run("experiment local --reps 2 --horizon 1 --dump-instances " + dump.string() +
                        " --out " + (dir_ / "local.csv").string());
  ASSERT_EQ(o.code, 0) << o.err;
  int count = 0;
  for (const auto& entry : fs::directory_iterator(dump)) {
    const Outcome s = run("solve " + entry.path().string());
    EXPECT_EQ(s.code, 0) << s.err;
    ++count;
  }
  EXPECT_EQ(count, 2);
}

}  // namespace
