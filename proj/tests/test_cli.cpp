#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pqnorm/cli.hpp"

using namespace pqnorm;

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  CliRun r;
  r.code = run_command(std::move(args), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    unsetenv("PQNORM_SEED");
    std::ofstream f(path_);
    f << "1,-2,0.5\n0.3,1,2\n-1,0.2,1\n";
  }
  void TearDown() override { std::remove(path_.c_str()); }
  std::string path_ = "cli_test_matrix.csv";
};

}  // namespace

TEST(ParseExponent, Forms) {
  EXPECT_EQ(parse_exponent("inf"), kInf);
  EXPECT_EQ(parse_exponent("2.5"), 2.5);
  EXPECT_NEAR(parse_exponent("4/3"), 4.0 / 3.0, 1e-15);
  EXPECT_THROW(parse_exponent("four"), UsageError);
  EXPECT_THROW(parse_exponent("2x"), UsageError);
}

TEST_F(CliTest, CertifyReportsRatio) {
  const CliRun r = run({"certify", "--p", "inf", "--q", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["schema"], kSchema);
  EXPECT_NEAR(j["ratio"].get<double>(), 1.78221, 1e-5);
  EXPECT_EQ(j["c1c2_ok"], true);
}

TEST_F(CliTest, NormMethodsAgreeOnOrdering) {
  const json power = json::parse(run({"norm", path_, "--p", "inf", "--q", "1"}).out);
  const json cp = json::parse(run({"norm", path_, "--p", "inf", "--q", "1", "--method", "cp"}).out);
  const json rounded = json::parse(run({"norm", path_, "--p", "inf", "--q", "1", "--method", "round"}).out);
  const json grid = json::parse(run({"norm", path_, "--p", "inf", "--q", "1", "--method", "grid"}).out);
  EXPECT_LE(power["value"].get<double>(), cp["value"].get<double>() * (1 + 1e-12));
  EXPECT_LE(rounded["value"].get<double>(), power["value"].get<double>() * (1 + 1e-9));
  EXPECT_LE(grid["value"].get<double>(), power["value"].get<double>() * (1 + 1e-9));
  EXPECT_TRUE(cp["dual"]["valid"].get<bool>());
}

TEST_F(CliTest, SeedFromEnvironment) {
  const std::vector<std::string> args = {"verify", "identity", "--a", "0.3", "--b", "0.3", "--samples", "2000"};
  const std::string base = run(args).out;
  setenv("PQNORM_SEED", "0", 1);
  EXPECT_EQ(run(args).out, base);
  setenv("PQNORM_SEED", "17", 1);
  const std::string seeded = run(args).out;
  EXPECT_NE(seeded, base);
  std::vector<std::string> explicit_args = args;
  explicit_args.insert(explicit_args.end(), {"--seed", "17"});
  unsetenv("PQNORM_SEED");
  EXPECT_EQ(run(explicit_args).out, seeded);
}

TEST_F(CliTest, RoundIsDeterministic) {
  const std::vector<std::string> args = {"round", path_, "--p", "4", "--q", "4/3", "--trials", "30", "--seed", "3"};
  const CliRun a = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, run(args).out);
  const json j = json::parse(a.out);
  EXPECT_LE(j["value"].get<double>(), j["cp_value"].get<double>());
}

TEST_F(CliTest, VerifySubcommands) {
  EXPECT_EQ(run({"verify", "coeffs", "--kmax", "9", "--grid-step", "0.25"}).code, 0);
  EXPECT_EQ(run({"verify", "kron", "--pairs", "2"}).code, 0);
  EXPECT_EQ(run({"verify", "duality", "--instances", "3"}).code, 0);
  const CliRun e = run({"verify", "embedding", "--n", "3", "--m", "1000", "--trials", "10"});
  ASSERT_EQ(e.code, 0);
  EXPECT_EQ(json::parse(e.out)["m"], 1000);
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"certify", "--p", "1.5", "--q", "1"}).code, 2);
  EXPECT_EQ(run({"certify", "--p", "abc"}).code, 2);
  EXPECT_EQ(run({"norm", path_, "--method", "magic"}).code, 2);
  EXPECT_EQ(run({"verify", "coeffs", "--kmax", "10"}).code, 2);
  EXPECT_EQ(run({"verify", "kron", "--p", "4", "--q", "2"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, InputFailuresExitOneWithJson) {
  const CliRun r = run({"norm", "/nonexistent/file.csv"});
  EXPECT_EQ(r.code, 1);
  const json j = json::parse(r.out);
  EXPECT_EQ(j["error"]["type"], "input");
  std::ofstream bad("cli_bad.csv");
  bad << "1,2\n3\n";
  bad.close();
  EXPECT_EQ(run({"norm", "cli_bad.csv"}).code, 1);
  std::remove("cli_bad.csv");
}

#ifdef PQNORM_CLI_PATH
TEST(CliBinary, RunsAsProcess) {
  const std::string cmd = std::string(PQNORM_CLI_PATH) + " certify --p 2 --q 2 > /dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  const std::string bad = std::string(PQNORM_CLI_PATH) + " certify --p 1 2> /dev/null";
  EXPECT_EQ(WEXITSTATUS(std::system(bad.c_str())), 2);
}
#endif
