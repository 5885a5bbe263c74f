#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "bridgediag/error.hpp"
#include "bridgediag/linalg.hpp"
#include "bridgediag/log_math.hpp"
#include "bridgediag/rng.hpp"

namespace bridgediag {
namespace {

TEST(LogMath, LogSumExpMatchesDirectSum) {
  const std::vector<double> xs = {0.1, -2.0, 3.5, 1.0};
  double direct = 0.0;
  for (double x : xs) direct += std::exp(x);
  EXPECT_NEAR(log_sum_exp(xs), std::log(direct), 1e-14);
  EXPECT_NEAR(log_mean_exp(xs), std::log(direct / 4.0), 1e-14);
}

TEST(LogMath, LogSumExpSurvivesHugeMagnitudes) {
  const std::vector<double> xs = {1000.0, 1000.0};
  EXPECT_NEAR(log_sum_exp(xs), 1000.0 + std::log(2.0), 1e-12);
  const std::vector<double> small = {-1000.0, -1000.0};
  EXPECT_NEAR(log_sum_exp(small), -1000.0 + std::log(2.0), 1e-12);
}

TEST(LogMath, NegativeInfinityIsZero) {
  const std::vector<double> xs = {kNegInf, 0.0};
  EXPECT_DOUBLE_EQ(log_sum_exp(xs), 0.0);
  const std::vector<double> zeros = {kNegInf, kNegInf};
  EXPECT_EQ(log_sum_exp(zeros), kNegInf);
  EXPECT_EQ(log_add_exp(kNegInf, kNegInf), kNegInf);
  EXPECT_NEAR(log_add_exp(std::log(2.0), std::log(3.0)), std::log(5.0), 1e-15);
}

TEST(LogMath, Errors) {
  EXPECT_THROW(log_sum_exp(std::vector<double>{}), Error);
  EXPECT_THROW(log_sum_exp(std::vector<double>{0.0, std::nan("")}), Error);
  EXPECT_THROW(median_finite(std::vector<double>{kNegInf}), Error);
}

TEST(LogMath, MedianIgnoresNonFinite) {
  EXPECT_DOUBLE_EQ(median_finite(std::vector<double>{3.0, kNegInf, 1.0, 2.0}), 2.0);
  EXPECT_DOUBLE_EQ(median_finite(std::vector<double>{4.0, 1.0, 2.0, 3.0}), 2.5);
}

TEST(Philox, KnownAnswerVectors) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}),
            (A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                          {0xffffffffu, 0xffffffffu}),
            (A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                          {0xa4093822u, 0x299f31d0u}),
            (A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RngStream, SameIdentitySameSequence) {
  RngStream a(42, 7);
  RngStream b(42, 7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  RngStream c(42, 8);
  RngStream d(42, 7);
  EXPECT_NE(c.next_u64(), d.next_u64());
}

TEST(RngStream, DeriveIgnoresPosition) {
  RngStream a(5, 1);
  const RngStream before = a.derive(3);
  for (int i = 0; i < 10; ++i) a.next_u64();
  RngStream after = a.derive(3);
  RngStream b = before;
  EXPECT_EQ(b.next_u64(), after.next_u64());
  EXPECT_NE(a.derive(3).next_u64(), a.derive(4).next_u64());
}

TEST(RngStream, UniformIsOpenInterval) {
  RngStream r(1, 0);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.01);
}

TEST(RngStream, NormalAndGammaMoments) {
  RngStream r(3, 0);
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0, g1 = 0.0, g2 = 0.0, h1 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s1 += z;
    s2 += z * z;
    const double g = r.gamma(2.5);
    g1 += g;
    g2 += g * g;
    h1 += r.gamma(0.4);
  }
  EXPECT_NEAR(s1 / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
  const double gm = g1 / n;
  EXPECT_NEAR(gm, 2.5, 0.03);
  EXPECT_NEAR(g2 / n - gm * gm, 2.5, 0.08);
  EXPECT_NEAR(h1 / n, 0.4, 0.01);
}

TEST(RngStream, UniformIndexCoversRange) {
  RngStream r(9, 0);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto k = r.uniform_index(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  for (int c : counts) EXPECT_NEAR(c, n / 7.0, 400.0);
}

Matrix spd_matrix() {
  Matrix m(3, 3);
  m << 2.0, 0.3, -0.4, 0.3, 1.5, 0.2, -0.4, 0.2, 0.9;
  return m;
}

TEST(Linalg, LogpdfMatchesDenseInverse) {
  const Matrix cov = spd_matrix();
  Vector mean(3);
  mean << 0.5, -1.0, 2.0;
  const CholFactor chol = cholesky_with_jitter(cov);
  EXPECT_EQ(chol.jitter_applied, 0.0);
  const std::vector<double> x = {1.0, 0.2, 1.7};
  const Eigen::Map<const Vector> xv(x.data(), 3);
  const Vector diff = xv - mean;
  const double quad = diff.dot(cov.inverse() * diff);
  const double expected =
      -1.5 * std::log(2.0 * std::numbers::pi) - 0.5 * std::log(cov.determinant()) - 0.5 * quad;
  EXPECT_NEAR(mvn_logpdf(x, mean, chol), expected, 1e-12);
  EXPECT_NEAR(chol.log_det(), std::log(cov.determinant()), 1e-12);

  PointMatrix rows(2, 3);
  rows << 1.0, 0.2, 1.7, 0.0, 0.0, 0.0;
  const auto batch = mvn_logpdf_rows(rows, mean, chol);
  EXPECT_NEAR(batch[0], expected, 1e-12);
}

TEST(Linalg, JitterRescuesSingularCovariance) {
  Matrix m(2, 2);
  m << 1.0, 1.0, 1.0, 1.0;
  const CholFactor chol = cholesky_with_jitter(m);
  EXPECT_GT(chol.jitter_applied, 0.0);
  EXPECT_LE(chol.jitter_applied, 1e-4);
}

TEST(Linalg, DegenerateAndAsymmetricInputsThrow) {
  EXPECT_THROW(cholesky_with_jitter(Matrix::Zero(2, 2)), Error);
  Matrix asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(cholesky_with_jitter(asym), Error);
  Matrix neg(2, 2);
  neg << -1.0, 0.0, 0.0, -1.0;
  EXPECT_THROW(cholesky_with_jitter(neg), Error);
}

TEST(Linalg, SampleMomentsMatch) {
  const Matrix cov = spd_matrix();
  Vector mean(3);
  mean << 1.0, 2.0, 3.0;
  RngStream rng(11, 0);
  const PointMatrix pts = mvn_sample(rng, mean, cholesky_with_jitter(cov), 100000);
  const Vector m = pts.colwise().mean().transpose();
  const Matrix centered = pts.rowwise() - m.transpose();
  const Matrix c = centered.transpose() * centered / static_cast<double>(pts.rows() - 1);
  EXPECT_LT((m - mean).cwiseAbs().maxCoeff(), 0.02);
  EXPECT_LT((c - cov).cwiseAbs().maxCoeff(), 0.03);
}

}  // namespace
}  // namespace bridgediag
