#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "test_support.hpp"

namespace tempmine {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("tempmine_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  // Runs the CLI with stdout and stderr captured in out.txt / err.txt.
  int run(const std::string& args) {
    const std::string cmd = std::string(TEMPMINE_CLI) + " " + args + " >" + path("out.txt").string() + " 2>" +
                            path("err.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string out() const { return slurp(path("out.txt")); }
  std::string err() const { return slurp(path("err.txt")); }

  void small_synth(NodeId nodes, std::size_t edges) {
    ASSERT_EQ(run("synth --out " + path("tx.csv").string() + " --nodes " + std::to_string(nodes) + " --edges " +
                  std::to_string(edges) + " --sg 3 --cycles 2 --seed 5"),
              0)
        << err();
  }

  fs::path dir_;
};

TEST_F(Cli, IngestMineEndToEnd) {
  small_synth(300, 3000);
  EXPECT_TRUE(fs::exists(path("tx.csv.truth.jsonl")));
  EXPECT_TRUE(fs::exists(path("tx.csv.manifest.json")));
  ASSERT_EQ(run("ingest --input " + path("tx.csv").string() + " --out " + path("g.cache").string()), 0) << err();
  const auto input = slurp(path("tx.csv"));
  const auto rows = std::count(input.begin(), input.end(), '\n') - 1;
  EXPECT_NE(out().find("edges: " + std::to_string(rows) + "\n"), std::string::npos) << out();
  ASSERT_EQ(run("mine --cache " + path("g.cache").string() + " --builtins --out " + path("f1.csv").string()), 0)
      << err();
  const auto csv = slurp(path("f1.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "edge_id,src,dst,timestamp,label,fan_in,fan_out,deg_in_src,deg_out_src,deg_in_dst,deg_out_dst,"
            "cycle_2,cycle_3,cycle_4,sg_count,stack_count");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), rows + 1);
  EXPECT_TRUE(fs::exists(path("f1.csv.manifest.json")));
}

TEST_F(Cli, WorkerCountDoesNotChangeBytes) {
  small_synth(300, 3000);
  const auto in = path("tx.csv").string();
  ASSERT_EQ(run("mine --input " + in + " --builtins --workers 1 --out " + path("a.csv").string()), 0) << err();
  ASSERT_EQ(run("mine --input " + in + " --builtins --workers 8 --out " + path("b.csv").string()), 0) << err();
  ASSERT_EQ(run("mine --input " + in + " --builtins --force-generic --out " + path("c.csv").string()), 0) << err();
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("c.csv")));
}

TEST_F(Cli, WorkersFromEnvironment) {
  small_synth(100, 500);
  const auto in = path("tx.csv").string();
  ASSERT_EQ(run("mine --input " + in + " --pattern builtin:fan_in --out " + path("a.csv").string()), 0);
  EXPECT_NE(out().find("1 worker(s)"), std::string::npos);
  const std::string env = "TEMPMINE_WORKERS=3 ";
  const int status = std::system((env + TEMPMINE_CLI + " mine --input " + in + " --pattern builtin:fan_in --out " +
                                  path("b.csv").string() + " >" + path("out.txt").string())
                                     .c_str());
  EXPECT_EQ(WEXITSTATUS(status), 0);
  EXPECT_NE(out().find("3 worker(s)"), std::string::npos);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  small_synth(100, 500);
  const auto in = path("tx.csv").string();
  EXPECT_EQ(run("mine --input " + in + " --pattern " + path("missing.pat").string() + " --out x.csv"), 2);
  EXPECT_NE(err().find("pattern file not found"), std::string::npos);
  EXPECT_EQ(run("mine --input " + in + " --pattern builtin:nope --out x.csv"), 2);
  EXPECT_EQ(run("mine --input " + in + " --out x.csv"), 2);
  EXPECT_EQ(run("mine --input " + in + " --builtins --delta fan_in=-5 --out x.csv"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  {
    std::ofstream bad(path("bad.pat"));
    bad << "pattern: bad\ndelta: 10\nstages:\n  - op: for_all\n    src: N5.in_neigh\n    dst_var: X\n"
           "emit:\n  mode: set_cardinality\n  target: X\n";
  }
  EXPECT_EQ(run("mine --input " + in + " --pattern " + path("bad.pat").string() + " --out x.csv"), 2);
  EXPECT_NE(err().find("bad.pat:4:5: stage 1: undefined operand N5"), std::string::npos) << err();
}

TEST_F(Cli, EmptyInputIsRuntimeError) {
  std::ofstream(path("empty.csv")).close();
  EXPECT_EQ(run("ingest --input " + path("empty.csv").string() + " --out " + path("g.cache").string()), 1);
  EXPECT_FALSE(err().empty());
}

TEST_F(Cli, ReingestGivesIdenticalCache) {
  small_synth(200, 1000);
  const auto in = path("tx.csv").string();
  ASSERT_EQ(run("ingest --input " + in + " --out " + path("a.cache").string()), 0);
  ASSERT_EQ(run("ingest --input " + in + " --out " + path("b.cache").string()), 0);
  EXPECT_EQ(slurp(path("a.cache")), slurp(path("b.cache")));
}

TEST_F(Cli, VerifyAgreesAndCatchesFault) {
  small_synth(30, 200);
  const auto in = path("tx.csv").string();
  ASSERT_EQ(run("verify --input " + in + " --builtins --delta '*=2000000'"), 0) << out() << err();
  EXPECT_NE(out().find("verify: OK"), std::string::npos);
  EXPECT_EQ(run("verify --input " + in + " --builtins --delta '*=2000000' --inject-fault"), 1);
  EXPECT_NE(out().find("verify: MISMATCH"), std::string::npos);
}

TEST_F(Cli, VerifyRefusesLargeGraph) {
  small_synth(500, 1000);
  EXPECT_EQ(run("verify --input " + path("tx.csv").string() + " --builtins"), 2);
  EXPECT_NE(err().find("refusing to verify"), std::string::npos);
}

TEST_F(Cli, BenchPrintsTable) {
  small_synth(200, 2000);
  ASSERT_EQ(run("bench --input " + path("tx.csv").string() + " --pattern builtin:sg_count --sweep 1,2,4,8 --out " +
                path("bench.csv").string()),
            0)
      << err();
  const auto table = slurp(path("bench.csv"));
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 5);
  EXPECT_NE(out().find("speedup"), std::string::npos);
}

TEST_F(Cli, PlanDump) {
  ASSERT_EQ(run("plan --pattern " + (testing::examples_dir() / "cycle_4_renamed.pat").string()), 0);
  EXPECT_NE(out().find("kernel CYCLE"), std::string::npos) << out();
}

}  // namespace
}  // namespace tempmine
