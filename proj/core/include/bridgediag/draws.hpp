#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "bridgediag/linalg.hpp"
#include "bridgediag/rng.hpp"

namespace bridgediag {

/// Posterior draws as chains x iterations x dimensions, stored draw-major
/// (all coordinates of one draw are contiguous; chains are concatenated).
/// Immutable once constructed; every entry is finite.
class DrawsMatrix {
 public:
  DrawsMatrix(std::size_t chains, std::size_t iters, std::size_t dim, std::vector<double> data);

  /// Builds from a pooled point matrix, chain c owning rows [c*iters, (c+1)*iters).
  static DrawsMatrix from_points(const PointMatrix& points, std::size_t chains);

  std::size_t chains() const noexcept { return chains_; }
  std::size_t iters() const noexcept { return iters_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return chains_ * iters_; }

  double at(std::size_t chain, std::size_t iter, std::size_t k) const {
    return data_[(chain * iters_ + iter) * dim_ + k];
  }
  std::span<const double> draw(std::size_t chain, std::size_t iter) const {
    return {data_.data() + (chain * iters_ + iter) * dim_, dim_};
  }
  std::span<const double> raw() const noexcept { return data_; }

  /// All draws as rows, chain-major.
  PointMatrix pooled() const;

  friend bool operator==(const DrawsMatrix&, const DrawsMatrix&) = default;

 private:
  std::size_t chains_;
  std::size_t iters_;
  std::size_t dim_;
  std::vector<double> data_;
};

struct HalfSplit {
  DrawsMatrix estimation_half;  // per-chain first floor(T/2) iterations
  DrawsMatrix fit_half;         // per-chain remaining iterations
};

struct Block {
  std::size_t chain;
  std::size_t start;
  std::size_t len;
  friend bool operator==(const Block&, const Block&) = default;
};

struct BlockPlan {
  std::size_t block_len;
  std::vector<Block> blocks;
};

struct CsvOptions {
  /// When false the file is a bare numeric matrix (with header) read as one chain.
  bool chain_columns = true;
};

DrawsMatrix read_draws_csv(const std::filesystem::path& path, const CsvOptions& options = {});
DrawsMatrix read_draws_csv(std::istream& in, const CsvOptions& options = {});

/// Writes `chain,iteration,theta.1..theta.d` with 17 significant digits.
void write_draws_csv(std::ostream& out, const DrawsMatrix& draws);
void write_draws_csv(const std::filesystem::path& path, const DrawsMatrix& draws);

HalfSplit split_halves(const DrawsMatrix& draws);

/// Per-chain concatenation of two draw sets with equal chain counts and dims.
DrawsMatrix concat_iterations(const DrawsMatrix& first, const DrawsMatrix& second);

/// ceil(sqrt(T))
std::size_t default_block_len(std::size_t iters);

BlockPlan make_block_plan(const DrawsMatrix& draws, std::size_t block_len);

/// Permutes the plan's blocks uniformly across all chains, concatenates them
/// and re-cuts the result into chains() pseudo-chains of iters() draws.
DrawsMatrix block_reshuffle(RngStream& rng, const DrawsMatrix& draws, const BlockPlan& plan);

}  // namespace bridgediag
