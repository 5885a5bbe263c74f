#include "bridgediag/draws.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "bridgediag/error.hpp"

namespace bridgediag {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    std::ostringstream msg;
    msg << "parse error at row " << row << ", column " << col << ": '" << cell << "'";
    throw Error(msg.str());
  }
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "non-finite draw at row " << row << ", column " << col;
    throw Error(msg.str());
  }
  return value;
}

void append_number(std::string& line, double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  line.append(buf, res.ptr);
}

}  // namespace

DrawsMatrix::DrawsMatrix(std::size_t chains, std::size_t iters, std::size_t dim,
                         std::vector<double> data)
    : chains_(chains), iters_(iters), dim_(dim), data_(std::move(data)) {
  if (chains_ < 1 || iters_ < 1 || dim_ < 1) throw Error("draws must have at least one chain, iteration and dimension");
  if (data_.size() != chains_ * iters_ * dim_) throw Error("draws data size does not match shape");
  for (double v : data_)
    if (!std::isfinite(v)) throw Error("non-finite draw");
}

DrawsMatrix DrawsMatrix::from_points(const PointMatrix& points, std::size_t chains) {
  const auto rows = static_cast<std::size_t>(points.rows());
  if (chains == 0 || rows % chains != 0) throw Error("unbalanced chains");
  std::vector<double> data(points.data(), points.data() + points.size());
  return DrawsMatrix(chains, rows / chains, static_cast<std::size_t>(points.cols()), std::move(data));
}

PointMatrix DrawsMatrix::pooled() const {
  PointMatrix out(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(dim_));
  std::copy(data_.begin(), data_.end(), out.data());
  return out;
}

DrawsMatrix read_draws_csv(std::istream& in, const CsvOptions& options) {
  std::string line;
  if (!std::getline(in, line)) throw Error("missing header");
  const auto header = split_fields(line);
  const std::size_t skip = options.chain_columns ? 2 : 0;
  if (options.chain_columns) {
    if (header.size() < 3 || header[0] != "chain" || header[1] != "iteration")
      throw Error("header must start with chain,iteration followed by parameter columns");
  } else if (header.empty() || header[0].empty()) {
    throw Error("missing header");
  }
  const std::size_t dim = header.size() - skip;

  // chain id -> draws, in order of first appearance
  std::map<long long, std::size_t> chain_index;
  std::vector<std::vector<double>> per_chain;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      std::ostringstream msg;
      msg << "parse error at row " << row << ": expected " << header.size() << " columns, got "
          << fields.size();
      throw Error(msg.str());
    }
    std::size_t slot = 0;
    if (options.chain_columns) {
      const double chain_value = parse_cell(fields[0], row, 1);
      parse_cell(fields[1], row, 2);
      const auto id = static_cast<long long>(chain_value);
      if (static_cast<double>(id) != chain_value) {
        std::ostringstream msg;
        msg << "parse error at row " << row << ", column 1: chain id must be an integer";
        throw Error(msg.str());
      }
      auto [it, inserted] = chain_index.try_emplace(id, per_chain.size());
      if (inserted) per_chain.emplace_back();
      slot = it->second;
    } else if (per_chain.empty()) {
      per_chain.emplace_back();
    }
    for (std::size_t k = skip; k < fields.size(); ++k)
      per_chain[slot].push_back(parse_cell(fields[k], row, k + 1));
  }
  if (per_chain.empty()) throw Error("no draws in file");
  const std::size_t per_chain_values = per_chain.front().size();
  for (const auto& c : per_chain)
    if (c.size() != per_chain_values) throw Error("unbalanced chains");

  std::vector<double> data;
  data.reserve(per_chain.size() * per_chain_values);
  for (const auto& c : per_chain) data.insert(data.end(), c.begin(), c.end());
  return DrawsMatrix(per_chain.size(), per_chain_values / dim, dim, std::move(data));
}

DrawsMatrix read_draws_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open draws file: " + path.string());
  return read_draws_csv(in, options);
}

void write_draws_csv(std::ostream& out, const DrawsMatrix& draws) {
  std::string line = "chain,iteration";
  for (std::size_t k = 0; k < draws.dim(); ++k) line += ",theta." + std::to_string(k + 1);
  out << line << '\n';
  for (std::size_t c = 0; c < draws.chains(); ++c) {
    for (std::size_t t = 0; t < draws.iters(); ++t) {
      line = std::to_string(c + 1) + "," + std::to_string(t + 1);
      for (double v : draws.draw(c, t)) {
        line += ',';
        append_number(line, v);
      }
      out << line << '\n';
    }
  }
}

void write_draws_csv(const std::filesystem::path& path, const DrawsMatrix& draws) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open output file: " + path.string());
  write_draws_csv(out, draws);
}

HalfSplit split_halves(const DrawsMatrix& draws) {
  if (draws.iters() < 4) throw Error("too few iterations");
  const std::size_t first = draws.iters() / 2;
  const std::size_t second = draws.iters() - first;
  const std::size_t d = draws.dim();
  std::vector<double> est;
  std::vector<double> fit;
  est.reserve(draws.chains() * first * d);
  fit.reserve(draws.chains() * second * d);
  const auto raw = draws.raw();
  for (std::size_t c = 0; c < draws.chains(); ++c) {
    const auto chain_begin = raw.begin() + static_cast<std::ptrdiff_t>(c * draws.iters() * d);
    const auto mid = chain_begin + static_cast<std::ptrdiff_t>(first * d);
    const auto chain_end = chain_begin + static_cast<std::ptrdiff_t>(draws.iters() * d);
    est.insert(est.end(), chain_begin, mid);
    fit.insert(fit.end(), mid, chain_end);
  }
  return HalfSplit{DrawsMatrix(draws.chains(), first, d, std::move(est)),
                   DrawsMatrix(draws.chains(), second, d, std::move(fit))};
}

DrawsMatrix concat_iterations(const DrawsMatrix& first, const DrawsMatrix& second) {
  if (first.chains() != second.chains() || first.dim() != second.dim())
    throw Error("cannot concatenate draws with different shapes");
  const std::size_t d = first.dim();
  std::vector<double> data;
  data.reserve(first.raw().size() + second.raw().size());
  for (std::size_t c = 0; c < first.chains(); ++c) {
    for (std::size_t t = 0; t < first.iters(); ++t) {
      const auto p = first.draw(c, t);
      data.insert(data.end(), p.begin(), p.end());
    }
    for (std::size_t t = 0; t < second.iters(); ++t) {
      const auto p = second.draw(c, t);
      data.insert(data.end(), p.begin(), p.end());
    }
  }
  return DrawsMatrix(first.chains(), first.iters() + second.iters(), d, std::move(data));
}

std::size_t default_block_len(std::size_t iters) {
  auto b = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(iters))));
  while (b > 1 && (b - 1) * (b - 1) >= iters) --b;
  while (b * b < iters) ++b;
  return b;
}

BlockPlan make_block_plan(const DrawsMatrix& draws, std::size_t block_len) {
  if (block_len < 1 || block_len > draws.iters()) throw Error("block length out of range");
  BlockPlan plan{block_len, {}};
  for (std::size_t c = 0; c < draws.chains(); ++c)
    for (std::size_t start = 0; start < draws.iters(); start += block_len)
      plan.blocks.push_back({c, start, std::min(block_len, draws.iters() - start)});
  return plan;
}

DrawsMatrix block_reshuffle(RngStream& rng, const DrawsMatrix& draws, const BlockPlan& plan) {
  std::vector<std::size_t> order(plan.blocks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_index(i));
    std::swap(order[i - 1], order[j]);
  }
  std::vector<double> data;
  data.reserve(draws.raw().size());
  for (std::size_t idx : order) {
    const Block& b = plan.blocks[idx];
    for (std::size_t t = b.start; t < b.start + b.len; ++t) {
      const auto p = draws.draw(b.chain, t);
      data.insert(data.end(), p.begin(), p.end());
    }
  }
  if (data.size() != draws.raw().size()) throw Error("block plan does not cover the draws");
  // The pool holds exactly chains*iters draws, so it re-cuts into equal pseudo-chains.
  return DrawsMatrix(draws.chains(), draws.iters(), draws.dim(), std::move(data));
}

}  // namespace bridgediag
