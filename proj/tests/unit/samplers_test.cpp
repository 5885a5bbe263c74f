#include <gtest/gtest.h>

#include <cmath>

#include "bridgediag/error.hpp"
#include "bridgediag/samplers.hpp"

namespace bridgediag {
namespace {

double lag1_dim0(const DrawsMatrix& d) {
  double mean = 0.0;
  for (std::size_t c = 0; c < d.chains(); ++c)
    for (std::size_t t = 0; t < d.iters(); ++t) mean += d.at(c, t, 0);
  mean /= static_cast<double>(d.size());
  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < d.chains(); ++c)
    for (std::size_t t = 0; t < d.iters(); ++t) {
      const double x = d.at(c, t, 0) - mean;
      den += x * x;
      if (t + 1 < d.iters()) num += x * (d.at(c, t + 1, 0) - mean);
    }
  return num / den;
}

TEST(Ar1Sampler, LagOneCorrelation) {
  RngStream rng(1, 0);
  const auto model = ConjugateLinRegModel::synthetic(rng, 30, 2);
  const DrawsMatrix d = sampler_ar1(model, 0.9, 1, 10000, rng);
  EXPECT_NEAR(lag1_dim0(d), 0.9, 0.02);
}

TEST(Ar1Sampler, ZeroRhoMatchesPosteriorMoments) {
  RngStream rng(2, 0);
  const auto model = ConjugateNormalModel::synthetic(rng, 10, 1.0, 2.0, 1.0);
  const auto post = *model.gaussian_posterior();
  const DrawsMatrix d = sampler_ar1(model, 0.0, 4, 20000, rng);
  double s1 = 0.0, s2 = 0.0;
  for (double v : d.raw()) {
    s1 += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(d.size());
  const double mean = s1 / n;
  EXPECT_NEAR(mean, post.mean(0), 0.01);
  EXPECT_NEAR(s2 / n - mean * mean, post.cov(0, 0), 0.02 * post.cov(0, 0));
  EXPECT_NEAR(lag1_dim0(d), 0.0, 0.02);
}

TEST(Ar1Sampler, RequiresGaussianPosterior) {
  const DifficultyDialModel model(2, 3.0);
  RngStream rng(3, 0);
  try {
    sampler_ar1(model, 0.5, 2, 10, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "AR(1) sampler requires Gaussian posterior");
  }
  const auto normal = ConjugateNormalModel::synthetic(rng, 5, 1.0, 1.0, 0.0);
  EXPECT_THROW(sampler_ar1(normal, 1.0, 2, 10, rng), Error);
}

TEST(RwmSampler, AcceptanceAndDeterminism) {
  const ConjugateNormalModel model(1, 1e6, 1.0, 0.0, 0.0);  // effectively N(0, 1)
  RngStream a(4, 0);
  RngStream b(4, 0);
  const RwmResult ra = sampler_rwm(model, 2.4, 2, 5000, a);
  const RwmResult rb = sampler_rwm(model, 2.4, 2, 5000, b);
  EXPECT_EQ(ra.draws, rb.draws);
  EXPECT_GT(ra.acceptance_rate, 0.3);
  EXPECT_LT(ra.acceptance_rate, 0.6);
}

TEST(RwmSampler, StudentTMoments) {
  const DifficultyDialModel model(2, 3.0);
  RngStream rng(5, 0);
  const DrawsMatrix d = sampler_rwm(model, 2.0, 4, 100000, rng).draws;
  // E|theta_k| for a bivariate t with 3 dof and identity scale is 2 sqrt(3) / pi.
  double abs_sum = 0.0;
  for (double v : d.raw()) abs_sum += std::abs(v);
  const double expected = 2.0 * std::sqrt(3.0) / std::acos(-1.0);
  EXPECT_NEAR(abs_sum / static_cast<double>(d.raw().size()), expected, 0.1 * expected);
}

TEST(RwmSampler, HugeStepsFailLoudly) {
  const ConjugateNormalModel model(100, 0.001, 1.0, 0.0, 0.0);
  RngStream rng(6, 0);
  EXPECT_THROW(sampler_rwm(model, 1e12, 1, 50, rng), Error);
  EXPECT_THROW(sampler_rwm(model, 0.0, 1, 50, rng), Error);
}

TEST(Samplers, ParseNames) {
  EXPECT_EQ(parse_sampler_kind("ar1"), SamplerKind::kAr1);
  EXPECT_STREQ(sampler_name(SamplerKind::kRwm), "rwm");
  EXPECT_THROW(parse_sampler_kind("nuts"), Error);
}

}  // namespace
}  // namespace bridgediag
