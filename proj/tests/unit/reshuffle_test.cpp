#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "bridgediag/error.hpp"
#include "bridgediag/reshuffle.hpp"
#include "bridgediag/samplers.hpp"

namespace bridgediag {
namespace {

std::shared_ptr<ConjugateNormalModel> easy_model() {
  RngStream rng(100, 0);
  return std::make_shared<ConjugateNormalModel>(
      ConjugateNormalModel::synthetic(rng, 20, 1.0, 1.0, 0.5));
}

TEST(Reshuffle, ReportShape) {
  const auto model = easy_model();
  RngStream rng(1, 0);
  const DrawsMatrix draws = exact_posterior_sample(*model, rng, 4, 400);
  ReshuffleConfig cfg;
  cfg.replicates = 30;
  const ReshuffleReport r = reshuffle_estimates(*model, draws, cfg, rng);
  EXPECT_EQ(r.replicate_count, 30u);
  EXPECT_EQ(r.estimates.size(), 30u);
  EXPECT_EQ(r.block_len, 20u);
  EXPECT_EQ(r.n_failed, 0u);
  EXPECT_GT(r.sd_log, 0.0);
  ASSERT_TRUE(r.khat_estimates);
  EXPECT_EQ(r.khat_estimates->tail_count, replicate_tail_count(30));
  EXPECT_TRUE(r.khat_low_confidence);
  for (std::size_t i = 0; i < r.replicates.size(); ++i) EXPECT_EQ(r.replicates[i].replicate, i + 1);
}

TEST(Reshuffle, TwoReplicatesAndBlockLimits) {
  const auto model = easy_model();
  RngStream rng(2, 0);
  const DrawsMatrix draws = exact_posterior_sample(*model, rng, 2, 100);
  ReshuffleConfig cfg;
  cfg.replicates = 2;
  const ReshuffleReport two = reshuffle_estimates(*model, draws, cfg, rng);
  EXPECT_EQ(two.estimates.size(), 2u);
  EXPECT_FALSE(two.khat_estimates);
  cfg.replicates = 10;
  for (std::size_t len : {std::size_t{1}, std::size_t{100}}) {
    cfg.block_len = len;
    EXPECT_NO_THROW(reshuffle_estimates(*model, draws, cfg, rng));
  }
  cfg.replicates = 1;
  EXPECT_THROW(reshuffle_estimates(*model, draws, cfg, rng), Error);
}

TEST(Reshuffle, SdInvariantUnderOffset) {
  const auto model = easy_model();
  const OffsetModel shifted(model, 17.0);
  RngStream rng(3, 0);
  const DrawsMatrix draws = exact_posterior_sample(*model, rng, 4, 200);
  ReshuffleConfig cfg;
  cfg.replicates = 12;
  const auto a = reshuffle_estimates(*model, draws, cfg, rng);
  const auto b = reshuffle_estimates(shifted, draws, cfg, rng);
  EXPECT_NEAR(a.sd_log, b.sd_log, 1e-8);
  for (std::size_t i = 0; i < a.estimates.size(); ++i)
    EXPECT_NEAR(b.estimates[i], a.estimates[i] + 17.0, 1e-8);
}

TEST(Reshuffle, IndependentOfWorkerCount) {
  const auto model = easy_model();
  RngStream rng(4, 0);
  const DrawsMatrix draws = exact_posterior_sample(*model, rng, 4, 200);
  ReshuffleConfig cfg;
  cfg.replicates = 16;
  cfg.workers = 1;
  const auto serial = reshuffle_estimates(*model, draws, cfg, rng);
  cfg.workers = 8;
  const auto parallel = reshuffle_estimates(*model, draws, cfg, rng);
  EXPECT_EQ(serial.estimates, parallel.estimates);
  EXPECT_EQ(serial.sd_log, parallel.sd_log);
}

TEST(MultiRun, AutocorrelationInflatesSd) {
  const auto model = easy_model();
  const RngStream root(5, 0);
  SamplerSpec iid;
  iid.chains = 4;
  iid.iters = 400;
  SamplerSpec ar = iid;
  ar.kind = SamplerKind::kAr1;
  ar.rho = 0.9;
  const auto a = multi_run_sd(*model, iid, 60, {}, root);
  const auto b = multi_run_sd(*model, ar, 60, {}, root);
  EXPECT_EQ(a.estimates.size(), 60u);
  EXPECT_GT(b.sd_log, 1.5 * a.sd_log);
}

}  // namespace
}  // namespace bridgediag
