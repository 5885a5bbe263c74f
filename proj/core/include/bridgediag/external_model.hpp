#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "bridgediag/targets.hpp"

namespace bridgediag {

/// Child process speaking newline-delimited JSON over stdin/stdout.
///
///   request:  {"id":<u64>,"thetas":[[<f64>,...],...]}
///   response: {"id":<u64>,"log_densities":[<f64 or "-inf">,...]}
///
/// Responses must echo the request id. A handle is single-threaded.
class ExternalEvaluator {
 public:
  explicit ExternalEvaluator(std::vector<std::string> argv,
                             std::chrono::milliseconds timeout = std::chrono::seconds(60));
  ~ExternalEvaluator();
  ExternalEvaluator(const ExternalEvaluator&) = delete;
  ExternalEvaluator& operator=(const ExternalEvaluator&) = delete;

  const std::vector<std::string>& argv() const { return argv_; }
  std::chrono::milliseconds timeout() const { return timeout_; }

  /// One request/response round trip. Throws Error carrying the raw payload
  /// on malformed responses, id mismatch, timeout or child exit.
  std::vector<LogValue> evaluate(const PointMatrix& thetas);

 private:
  void write_all(const std::string& data);
  std::string read_line();

  std::vector<std::string> argv_;
  std::chrono::milliseconds timeout_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::uint64_t next_id_ = 1;
  std::string pending_;
};

/// Formats a request line (without the trailing newline).
std::string format_eval_request(std::uint64_t id, const PointMatrix& thetas);

/// Parses a response line; validates the id and the count.
std::vector<LogValue> parse_eval_response(const std::string& line, std::uint64_t expected_id,
                                          std::size_t expected_count);

std::vector<LogValue> external_model_eval(ExternalEvaluator& endpoint, const PointMatrix& thetas);

/// TargetModel backed by an external evaluator process.
class ExternalModel final : public TargetModel {
 public:
  ExternalModel(std::size_t dim, std::vector<std::string> argv,
                std::chrono::milliseconds timeout = std::chrono::seconds(60));

  std::size_t dim() const override { return dim_; }
  std::string name() const override { return "external"; }
  LogValue log_density(std::span<const double> theta) const override;
  std::vector<LogValue> log_density_batch(const PointMatrix& thetas) const override;
  std::unique_ptr<TargetModel> worker_instance() const override;

 private:
  std::size_t dim_;
  std::vector<std::string> argv_;
  std::chrono::milliseconds timeout_;
  mutable std::mutex mutex_;
  mutable std::unique_ptr<ExternalEvaluator> evaluator_;
};

}  // namespace bridgediag
