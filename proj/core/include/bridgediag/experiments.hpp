#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bridgediag/bridge.hpp"
#include "bridgediag/mcse.hpp"
#include "bridgediag/pareto.hpp"
#include "bridgediag/samplers.hpp"

namespace bridgediag {

/// Everything needed to reproduce a command's output.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string model;      // built-in model name; empty with an evaluator
  std::string evaluator;  // command line, split on whitespace
  std::string draws;      // CSV path; empty means sample from the model
  bool chain_columns = true;
  std::string sampler = "exact";
  double rho = 0.0;
  double step_scale = 0.0;
  std::size_t draws_total = 4000;
  std::size_t chains = 4;
  double tol = 1e-10;
  int max_iter = 1000;
  std::optional<std::size_t> tail_count;
  std::optional<std::size_t> block_len;
  std::size_t replicates = 50;
  std::size_t repeats = 200;
  std::size_t reshuffle_replicates = 0;  // calibrate: per-repeat reshuffle, 0 = off

  // built-in model parameters
  std::size_t dim = 0;  // 0 picks the model default
  double dof = 3.0;
  std::size_t n_obs = 0;
  std::size_t covariates = 5;
  std::uint64_t data_seed = 20230101;

  BridgeConfig bridge_config() const;
  SamplerSpec sampler_spec() const;
};

nlohmann::json run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);

/// Built-in models: conjugate-normal, conjugate-linreg, difficulty-dial.
/// With an evaluator, an ExternalModel of dimension config.dim.
std::shared_ptr<TargetModel> build_model(const RunConfig& config);

/// Reads config.draws if set, otherwise runs the configured sampler for
/// draws_total / chains iterations per chain.
DrawsMatrix obtain_draws(const TargetModel& model, const RunConfig& config, RngStream& rng);

struct EstimateReport {
  EstimateOutput output;
  McseReport mcse;
  KhatReport khat;
};

/// estimate_log_ml followed by mcse_of_bridge and khat_report.
EstimateReport run_estimate(const TargetModel& model, const DrawsMatrix& draws,
                            const BridgeConfig& config, RngStream& rng,
                            std::optional<std::size_t> tail_count = std::nullopt);

/// Explains the tail-count rounding for S terms.
std::string tail_count_note(std::size_t sample_size);

struct CalibrationRow {
  std::size_t repeat_id = 0;
  double log_ml = 0.0;
  double mcse_log = 0.0;
  double khat_num = 0.0;
  double khat_den = 0.0;
  double ess_den = 0.0;
  std::optional<double> reshuffle_sd;
  bool converged = false;
  friend bool operator==(const CalibrationRow&, const CalibrationRow&) = default;
};

void write_calibration_csv(std::ostream& out, const std::vector<CalibrationRow>& rows);
std::vector<CalibrationRow> read_calibration_csv(std::istream& in);

struct CalibrationConfig {
  SamplerSpec sampler;
  BridgeConfig bridge;
  std::size_t repeats = 200;
  std::optional<std::size_t> tail_count;
  std::size_t reshuffle_replicates = 0;  // 0 turns the per-repeat reshuffle off
  std::optional<std::size_t> block_len;
  std::size_t workers = 1;
};

struct CalibrationSummary {
  std::size_t repeats = 0;
  double empirical_sd = 0.0;
  double mean_mcse_log = 0.0;
  double mcse_sd_ratio = 0.0;  // mean_mcse_log / empirical_sd
  double mean_khat_num = 0.0;
  double mean_khat_den = 0.0;
  double mean_ess_den = 0.0;
  double mean_log_ml = 0.0;
  std::size_t n_nonconverged = 0;
  std::optional<double> mean_reshuffle_sd;
  std::optional<double> reshuffle_sd_ratio;
  std::optional<double> oracle_log_ml;
  std::optional<double> bias;  // mean_log_ml - oracle
};

struct CalibrationResult {
  std::vector<CalibrationRow> rows;
  CalibrationSummary summary;
};

/// Repeat i (1-based) samples and estimates with stream root.derive(i), the
/// same streams multi_run_sd uses. Needs at least 10 repeats.
CalibrationResult calibrate(const TargetModel& model, const CalibrationConfig& config,
                            const RngStream& root);

nlohmann::json calibration_summary_to_json(const CalibrationSummary& summary);

struct PlanAdvice {
  std::uint64_t multiplier = 1;
  std::string message;
};

/// ceil((current / target)^2) more draws, with the pre-asymptotic caveat.
PlanAdvice planning_helper(double current_mcse, double target_mcse);

/// MCSE of the difference of two independent log estimates.
double difference_mcse(double mcse_a, double mcse_b);

}  // namespace bridgediag
