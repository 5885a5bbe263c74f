#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>

#include "bridgediag/bridge.hpp"
#include "bridgediag/error.hpp"
#include "bridgediag/external_model.hpp"
#include "bridgediag/mcse.hpp"

namespace bridgediag {
namespace {

using namespace std::chrono_literals;

std::vector<std::string> fixture(const std::string& mode, const std::string& arg = "") {
  std::vector<std::string> argv = {FIXTURE_EVALUATOR, mode};
  if (!arg.empty()) argv.push_back(arg);
  return argv;
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "<no error>";
}

TEST(Protocol, RequestFormat) {
  PointMatrix p(2, 2);
  p << 1.0, 2.5, -0.125, 0.0;
  EXPECT_EQ(format_eval_request(3, p), R"({"id":3,"thetas":[[1.0,2.5],[-0.125,0.0]]})");
}

TEST(Protocol, ResponseParsing) {
  const auto v = parse_eval_response(R"({"id":4,"log_densities":[-1.5,"-inf",2]})", 4, 3);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0], -1.5);
  EXPECT_EQ(v[1], kNegInf);
  EXPECT_EQ(v[2], 2.0);
  EXPECT_NE(error_of([] { parse_eval_response(R"({"id":5,"log_densities":[1]})", 4, 1); })
                .find("does not match"),
            std::string::npos);
  EXPECT_NE(error_of([] { parse_eval_response(R"({"id":4,"log_densities":[1]})", 4, 2); })
                .find("expected 2"),
            std::string::npos);
  const std::string bad = error_of([] { parse_eval_response("{oops", 1, 1); });
  EXPECT_NE(bad.find("malformed"), std::string::npos);
  EXPECT_NE(bad.find("{oops"), std::string::npos);
  EXPECT_THROW(parse_eval_response(R"({"id":1,"log_densities":["inf"]})", 1, 1), Error);
}

TEST(ExternalModel, EstimatesKnownNormalizer) {
  const ExternalModel model(3, fixture("std-normal", "2.5"));
  RngStream rng(1, 0);
  std::vector<double> data(4 * 500 * 3);
  for (double& v : data) v = rng.normal();
  const DrawsMatrix draws(4, 500, 3, data);
  const EstimateOutput out = estimate_log_ml(model, draws, {}, rng);
  const double oracle = 2.5 + 1.5 * std::log(2.0 * std::numbers::pi);
  EXPECT_LT(std::abs(out.result.log_ml - oracle), 4 * mcse_of_bridge(out.result).mcse_log + 1e-6);
  EXPECT_NE(model.worker_instance(), nullptr);
}

TEST(ExternalModel, NegativeInfinityEverywhere) {
  const ExternalModel model(1, fixture("neg-inf"));
  EXPECT_EQ(log_unnorm_posterior(model, std::vector<double>{0.0}), kNegInf);
  RngStream rng(2, 0);
  std::vector<double> data(2 * 20);
  for (double& v : data) v = rng.normal();
  EXPECT_THROW(estimate_log_ml(model, DrawsMatrix(2, 20, 1, data), {}, rng), Error);
}

TEST(ExternalEvaluator, FailuresCarryDiagnostics) {
  PointMatrix p(1, 1);
  p << 0.0;
  {
    ExternalEvaluator ev(fixture("hang"), 200ms);
    EXPECT_NE(error_of([&] { ev.evaluate(p); }).find("timeout"), std::string::npos);
  }
  {
    ExternalEvaluator ev(fixture("garbage"));
    const std::string msg = error_of([&] { ev.evaluate(p); });
    EXPECT_NE(msg.find("malformed"), std::string::npos);
    EXPECT_NE(msg.find("this is not json"), std::string::npos);
  }
  {
    ExternalEvaluator ev(fixture("bad-id"));
    EXPECT_NE(error_of([&] { ev.evaluate(p); }).find("does not match"), std::string::npos);
  }
  {
    ExternalEvaluator ev(fixture("exit"));
    EXPECT_NE(error_of([&] { ev.evaluate(p); }).find("exited"), std::string::npos);
  }
  {
    ExternalEvaluator ev({"/nonexistent/evaluator"});
    EXPECT_THROW(ev.evaluate(p), Error);
  }
}

TEST(ExternalModel, RecoversAfterFailure) {
  const ExternalModel model(2, fixture("std-normal"));
  PointMatrix p(2, 2);
  p << 0.0, 0.0, 1.0, 1.0;
  const auto v = model.log_density_batch(p);
  EXPECT_EQ(v[0], 0.0);
  EXPECT_EQ(v[1], -1.0);
  EXPECT_THROW(model.log_density_batch(PointMatrix(1, 3)), Error);
  EXPECT_EQ(model.log_density_batch(p), v);
}

}  // namespace
}  // namespace bridgediag
