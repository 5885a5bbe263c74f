#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bridgediag/draws.hpp"
#include "bridgediag/experiments.hpp"
#include "cli.hpp"

namespace bridgediag {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("bridgediag_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

TEST_F(CliTest, EstimateEasyCase) {
  const CliRun r = run({"estimate", "--model", "conjugate-normal", "--sampler", "exact",
                     "--draws-total", "4000", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_LT(j["mcse_log"].get<double>(), 0.05);
  EXPECT_EQ(j["S1"], 2000);
  EXPECT_TRUE(j["converged"].get<bool>());
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run({"estimate"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"estimate", "--model", "conjugate-normal", "--bogus"}).code, 2);
  EXPECT_EQ(run({"estimate", "--model", "conjugate-normal", "--sampler", "nuts"}).code, 2);
  EXPECT_EQ(run({"estimate", "--evaluator", "x"}).code, 2);
  EXPECT_EQ(run({"calibrate", "--model", "conjugate-normal", "--repeats", "1"}).code, 2);
  EXPECT_EQ(run({"reshuffle", "--model", "conjugate-normal", "--replicates", "1"}).code, 2);
  EXPECT_EQ(run({"estimate", "--model", "conjugate-normal", "--draws-total", "4001"}).code, 2);
  EXPECT_EQ(run({"plan", "--current", "1"}).code, 2);
}

TEST_F(CliTest, EstimationErrorsExitOne) {
  EXPECT_EQ(run({"estimate", "--model", "conjugate-normal", "--draws", path("missing.csv")}).code,
            1);
  EXPECT_EQ(run({"estimate", "--model", "no-such-model"}).code, 1);
  EXPECT_EQ(run({"estimate", "--model", "difficulty-dial", "--sampler", "ar1"}).code, 1);
}

TEST_F(CliTest, ExternalEvaluatorWithCsvDraws) {
  RngStream rng(3, 0);
  std::vector<double> data(4 * 300 * 2);
  for (double& v : data) v = rng.normal();
  write_draws_csv(fs::path(path("draws.csv")), DrawsMatrix(4, 300, 2, data));
  const CliRun r = run({"estimate", "--draws", path("draws.csv"), "--evaluator",
                     std::string(FIXTURE_EVALUATOR) + " std-normal 1.0", "--dim", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["log_ml"].get<double>(), 1.0 + std::log(2.0 * std::acos(-1.0)),
              4 * j["mcse_log"].get<double>() + 1e-6);
  EXPECT_EQ(j["model"], "external");
}

TEST_F(CliTest, DiagnoseReproducesEstimate) {
  const std::string out = path("result.json");
  ASSERT_EQ(run({"estimate", "--model", "conjugate-linreg", "--seed", "4", "--keep-terms", "--out",
                 out})
                .code,
            0);
  const json original = json::parse(slurp(out));
  const CliRun d = run({"diagnose", out});
  ASSERT_EQ(d.code, 0) << d.err;
  const json again = json::parse(d.out);
  for (const char* key : {"log_ml", "mcse_log", "mcse_rel_linear", "khat_numerator",
                          "khat_denominator", "ess_denominator", "iterations", "converged", "S1",
                          "S2", "tail_count_used", "jitter_applied", "seed"})
    EXPECT_EQ(again[key], original[key]) << key;
  EXPECT_EQ(run({"diagnose", path("nope.json")}).code, 2);
}

TEST_F(CliTest, ReshuffleCsvAndCalibrationCsv) {
  const CliRun r = run({"reshuffle", "--model", "conjugate-normal", "--replicates", "10",
                     "--csv-out", path("rep.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(path("rep.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "replicate,log_ml,converged,iterations");
  EXPECT_EQ(json::parse(r.out)["R"], 10);

  const CliRun c = run({"calibrate", "--model", "conjugate-normal", "--repeats", "10",
                     "--draws-total", "400", "--format", "csv", "--out", path("cal.csv")});
  ASSERT_EQ(c.code, 0) << c.err;
  std::ifstream in(path("cal.csv"));
  EXPECT_EQ(read_calibration_csv(in).size(), 10u);
  EXPECT_EQ(json::parse(c.out)["repeats"], 10);
}

TEST_F(CliTest, OutputsIndependentOfThreadCount) {
  const std::vector<std::vector<std::string>> commands = {
      {"calibrate", "--model", "conjugate-normal", "--repeats", "12", "--draws-total", "400",
       "--reshuffle-replicates", "4"},
      {"reshuffle", "--model", "conjugate-linreg", "--replicates", "9", "--seed", "5"},
  };
  for (const auto& cmd : commands) {
    ::setenv("BRIDGEDIAG_THREADS", "1", 1);
    const CliRun a = run(cmd);
    ::setenv("BRIDGEDIAG_THREADS", "8", 1);
    const CliRun b = run(cmd);
    ::unsetenv("BRIDGEDIAG_THREADS");
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
  }
}

TEST_F(CliTest, PersistedConfigReproducesOutput) {
  const CliRun first = run({"estimate", "--model", "difficulty-dial", "--dim", "3", "--seed", "77",
                         "--draws-total", "1000", "--chains", "2"});
  ASSERT_EQ(first.code, 0) << first.err;
  {
    std::ofstream cfg(path("config.json"));
    cfg << json::parse(first.out)["config"].dump();
  }
  const CliRun second = run({"estimate", "--config", path("config.json")});
  ASSERT_EQ(second.code, 0) << second.err;
  EXPECT_EQ(first.out, second.out);
}

TEST_F(CliTest, Plan) {
  const CliRun r = run({"plan", "--current", "2.5", "--target", "0.2"});
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  EXPECT_EQ(j["multiplier"], 157);
  EXPECT_NE(j["message"].get<std::string>().find("truncating would give 156"), std::string::npos);
}

}  // namespace
}  // namespace bridgediag
