#include "bridgediag/external_model.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <nlohmann/json.hpp>
#include <thread>

#include "bridgediag/error.hpp"

namespace bridgediag {
namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

[[noreturn]] void fail_with_payload(const std::string& what, const std::string& payload) {
  throw Error("external evaluator: " + what + "; payload: " + payload);
}

}  // namespace

ExternalEvaluator::ExternalEvaluator(std::vector<std::string> argv,
                                     std::chrono::milliseconds timeout)
    : argv_(std::move(argv)), timeout_(timeout) {
  if (argv_.empty() || argv_.front().empty()) throw Error("external evaluator: empty command");
  ignore_sigpipe();

  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw Error("external evaluator: pipe failed");
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw Error("external evaluator: pipe failed");
  }

  std::vector<char*> cargv;
  for (auto& a : argv_) cargv.push_back(a.data());
  cargv.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    throw Error("external evaluator: fork failed");
  }
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execvp(cargv[0], cargv.data());
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

ExternalEvaluator::~ExternalEvaluator() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ <= 0) return;
  // Closing stdin asks the child to exit; give it a moment before killing it.
  for (int i = 0; i < 50; ++i) {
    if (::waitpid(pid_, nullptr, WNOHANG) == pid_) return;
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  ::kill(pid_, SIGKILL);
  ::waitpid(pid_, nullptr, 0);
}

void ExternalEvaluator::write_all(const std::string& data) {
  std::size_t written = 0;
  while (written < data.size()) {
    const ssize_t n = ::write(to_child_, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail_with_payload("process exited (write failed: " + std::string(std::strerror(errno)) + ")",
                        "");
    }
    written += static_cast<std::size_t>(n);
  }
}

std::string ExternalEvaluator::read_line() {
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  for (;;) {
    const auto newline = pending_.find('\n');
    if (newline != std::string::npos) {
      std::string line = pending_.substr(0, newline);
      pending_.erase(0, newline + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) fail_with_payload("timeout", pending_);
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      fail_with_payload("poll failed", pending_);
    }
    if (ready == 0) fail_with_payload("timeout", pending_);
    char buf[65536];
    const ssize_t n = ::read(from_child_, buf, sizeof(buf));
    if (n < 0) {
      if (errno == EINTR) continue;
      fail_with_payload("read failed", pending_);
    }
    if (n == 0) fail_with_payload("process exited", pending_);
    pending_.append(buf, static_cast<std::size_t>(n));
  }
}

std::vector<LogValue> ExternalEvaluator::evaluate(const PointMatrix& thetas) {
  const std::uint64_t id = next_id_++;
  write_all(format_eval_request(id, thetas) + "\n");
  const std::string line = read_line();
  return parse_eval_response(line, id, static_cast<std::size_t>(thetas.rows()));
}

std::string format_eval_request(std::uint64_t id, const PointMatrix& thetas) {
  nlohmann::json points = nlohmann::json::array();
  for (Eigen::Index i = 0; i < thetas.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < thetas.cols(); ++k) row.push_back(thetas(i, k));
    points.push_back(std::move(row));
  }
  nlohmann::json request;
  request["id"] = id;
  request["thetas"] = std::move(points);
  return request.dump();
}

std::vector<LogValue> parse_eval_response(const std::string& line, std::uint64_t expected_id,
                                          std::size_t expected_count) {
  nlohmann::json response;
  try {
    response = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    fail_with_payload("malformed response", line);
  }
  if (!response.is_object() || !response.contains("id") || !response.contains("log_densities"))
    fail_with_payload("malformed response", line);
  const auto& id = response["id"];
  if (!id.is_number_unsigned() && !(id.is_number_integer() && id.get<std::int64_t>() >= 0))
    fail_with_payload("malformed response id", line);
  if (id.get<std::uint64_t>() != expected_id)
    fail_with_payload("response id " + std::to_string(id.get<std::uint64_t>()) +
                          " does not match request id " + std::to_string(expected_id),
                      line);
  const auto& values = response["log_densities"];
  if (!values.is_array() || values.size() != expected_count)
    fail_with_payload("expected " + std::to_string(expected_count) + " log densities", line);
  std::vector<LogValue> out;
  out.reserve(expected_count);
  for (const auto& v : values) {
    if (v.is_number()) {
      out.push_back(v.get<double>());
    } else if (v.is_string() && v.get<std::string>() == "-inf") {
      out.push_back(kNegInf);
    } else {
      fail_with_payload("log density must be a number or \"-inf\"", line);
    }
  }
  return out;
}

std::vector<LogValue> external_model_eval(ExternalEvaluator& endpoint, const PointMatrix& thetas) {
  return endpoint.evaluate(thetas);
}

ExternalModel::ExternalModel(std::size_t dim, std::vector<std::string> argv,
                             std::chrono::milliseconds timeout)
    : dim_(dim), argv_(std::move(argv)), timeout_(timeout) {
  if (dim_ < 1) throw Error("external model needs dim >= 1");
}

LogValue ExternalModel::log_density(std::span<const double> theta) const {
  PointMatrix one(1, static_cast<Eigen::Index>(theta.size()));
  for (std::size_t k = 0; k < theta.size(); ++k) one(0, static_cast<Eigen::Index>(k)) = theta[k];
  return log_density_batch(one).front();
}

std::vector<LogValue> ExternalModel::log_density_batch(const PointMatrix& thetas) const {
  if (static_cast<std::size_t>(thetas.cols()) != dim_) throw Error("dimension mismatch");
  std::lock_guard lock(mutex_);
  if (!evaluator_) evaluator_ = std::make_unique<ExternalEvaluator>(argv_, timeout_);
  try {
    return evaluator_->evaluate(thetas);
  } catch (...) {
    // The stream may be out of sync now; the next call starts a fresh process.
    evaluator_.reset();
    throw;
  }
}

std::unique_ptr<TargetModel> ExternalModel::worker_instance() const {
  return std::make_unique<ExternalModel>(dim_, argv_, timeout_);
}

}  // namespace bridgediag
