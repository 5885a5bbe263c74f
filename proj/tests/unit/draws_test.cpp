#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>
#include <vector>

#include "bridgediag/draws.hpp"
#include "bridgediag/error.hpp"

namespace bridgediag {
namespace {

DrawsMatrix counting_draws(std::size_t chains, std::size_t iters, std::size_t dim) {
  std::vector<double> data(chains * iters * dim);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<double>(i) * 0.5 - 3.0;
  return DrawsMatrix(chains, iters, dim, std::move(data));
}

std::vector<std::vector<double>> sorted_points(const DrawsMatrix& d) {
  std::vector<std::vector<double>> pts;
  for (std::size_t c = 0; c < d.chains(); ++c)
    for (std::size_t t = 0; t < d.iters(); ++t) {
      const auto p = d.draw(c, t);
      pts.emplace_back(p.begin(), p.end());
    }
  std::sort(pts.begin(), pts.end());
  return pts;
}

std::string expect_error(const std::string& csv, const CsvOptions& opts = {}) {
  std::istringstream in(csv);
  try {
    read_draws_csv(in, opts);
  } catch (const Error& e) {
    return e.what();
  }
  ADD_FAILURE() << "no error for:\n" << csv;
  return {};
}

TEST(Draws, CsvRoundTripIsLossless) {
  RngStream rng(1, 0);
  std::vector<double> data(3 * 7 * 2);
  for (double& v : data) v = rng.normal() * 1e-3 + 1.0 / 3.0;
  const DrawsMatrix d(3, 7, 2, data);
  std::stringstream ss;
  write_draws_csv(ss, d);
  EXPECT_EQ(read_draws_csv(ss), d);
}

TEST(Draws, ChainsGroupedByFirstAppearance) {
  const std::string csv =
      "chain,iteration,a\n"
      "2,1,10\n"
      "1,1,20\n"
      "2,2,11\n"
      "1,2,21\n";
  std::istringstream in(csv);
  const DrawsMatrix d = read_draws_csv(in);
  EXPECT_EQ(d.chains(), 2u);
  EXPECT_EQ(d.at(0, 1, 0), 11.0);
  EXPECT_EQ(d.at(1, 0, 0), 20.0);
}

TEST(Draws, CsvErrorsNameTheProblem) {
  EXPECT_EQ(expect_error("chain,iteration,a\n1,1,0.5\n1,2,0.6\n2,1,0.7\n"), "unbalanced chains");
  EXPECT_NE(expect_error("chain,iteration,a,b\n1,1,0.5,x\n").find("row 2, column 4"),
            std::string::npos);
  EXPECT_NE(expect_error("chain,iteration,a\n1,1,nan\n").find("non-finite"), std::string::npos);
  EXPECT_NE(expect_error("a,b\n1,2\n").find("header"), std::string::npos);
  EXPECT_NE(expect_error("").find("header"), std::string::npos);
}

TEST(Draws, BareMatrixIsOneChain) {
  std::istringstream in("x,y\n1,2\n3,4\n5,6\n");
  CsvOptions opts;
  opts.chain_columns = false;
  const DrawsMatrix d = read_draws_csv(in, opts);
  EXPECT_EQ(d.chains(), 1u);
  EXPECT_EQ(d.iters(), 3u);
  EXPECT_EQ(d.at(0, 2, 1), 6.0);
}

TEST(Draws, SplitHalvesPerChain) {
  const DrawsMatrix d = counting_draws(2, 7, 1);
  const HalfSplit s = split_halves(d);
  EXPECT_EQ(s.estimation_half.iters(), 3u);
  EXPECT_EQ(s.fit_half.iters(), 4u);
  EXPECT_EQ(s.estimation_half.at(1, 0, 0), d.at(1, 0, 0));
  EXPECT_EQ(s.fit_half.at(1, 0, 0), d.at(1, 3, 0));
  EXPECT_EQ(concat_iterations(s.estimation_half, s.fit_half), d);
  EXPECT_THROW(split_halves(counting_draws(2, 3, 1)), Error);
}

TEST(Draws, BlockPlanCoversEveryIteration) {
  const DrawsMatrix d = counting_draws(3, 10, 1);
  EXPECT_EQ(default_block_len(10), 4u);
  EXPECT_EQ(default_block_len(16), 4u);
  EXPECT_EQ(default_block_len(17), 5u);
  const BlockPlan plan = make_block_plan(d, 4);
  ASSERT_EQ(plan.blocks.size(), 9u);
  EXPECT_EQ(plan.blocks[2], (Block{0, 8, 2}));
  EXPECT_THROW(make_block_plan(d, 0), Error);
  EXPECT_THROW(make_block_plan(d, 11), Error);
}

TEST(Draws, ReshuffleIsAPermutationOfDraws) {
  const DrawsMatrix d = counting_draws(4, 25, 2);
  const auto original = sorted_points(d);
  for (std::size_t len : {1, 3, 5, 25}) {
    const BlockPlan plan = make_block_plan(d, len);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      RngStream rng(seed, 1);
      const DrawsMatrix shuffled = block_reshuffle(rng, d, plan);
      EXPECT_EQ(shuffled.chains(), d.chains());
      EXPECT_EQ(shuffled.iters(), d.iters());
      EXPECT_EQ(sorted_points(shuffled), original);
    }
  }
}

TEST(Draws, ReshuffleKeepsWithinBlockOrder) {
  const DrawsMatrix d = counting_draws(2, 16, 1);
  RngStream rng(3, 0);
  const DrawsMatrix s = block_reshuffle(rng, d, make_block_plan(d, 4));
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t t = 0; t < 16; t += 4)
      for (std::size_t k = 1; k < 4; ++k) EXPECT_EQ(s.at(c, t + k, 0), s.at(c, t, 0) + 0.5 * k);
}

double lag1(const DrawsMatrix& d) {
  double num = 0.0, den = 0.0, mean = 0.0;
  const auto raw = d.raw();
  for (double v : raw) mean += v;
  mean /= static_cast<double>(raw.size());
  for (std::size_t c = 0; c < d.chains(); ++c)
    for (std::size_t t = 0; t < d.iters(); ++t) {
      const double x = d.at(c, t, 0) - mean;
      den += x * x;
      if (t + 1 < d.iters()) num += x * (d.at(c, t + 1, 0) - mean);
    }
  return num / den;
}

TEST(Draws, ReshufflePreservesLagOneAutocorrelation) {
  RngStream rng(5, 0);
  const std::size_t T = 10000;
  const double rho = 0.8;
  std::vector<double> data(T);
  double x = rng.normal();
  for (std::size_t t = 0; t < T; ++t) {
    data[t] = x;
    x = rho * x + std::sqrt(1 - rho * rho) * rng.normal();
  }
  const DrawsMatrix d(1, T, 1, data);
  const DrawsMatrix s = block_reshuffle(rng, d, make_block_plan(d, default_block_len(T)));
  EXPECT_NEAR(lag1(s), lag1(d), 0.1 * lag1(d));
}

TEST(Draws, ConstructorRejectsNonFinite) {
  EXPECT_THROW(DrawsMatrix(1, 2, 1, {0.0, std::numeric_limits<double>::infinity()}), Error);
  EXPECT_THROW(DrawsMatrix(1, 2, 1, {0.0}), Error);
}

}  // namespace
}  // namespace bridgediag
