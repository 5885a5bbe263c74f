#include "bridgediag/experiments.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "bridgediag/error.hpp"
#include "bridgediag/external_model.hpp"
#include "bridgediag/parallel.hpp"
#include "bridgediag/reshuffle.hpp"

namespace bridgediag {

namespace {

using nlohmann::json;

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string shortest(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& field, std::size_t row, std::size_t col) {
  double value = 0.0;
  const char* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw Error("parse error at row " + std::to_string(row) + ", column " + std::to_string(col));
  return value;
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> split_whitespace(const std::string& s) {
  std::istringstream ss(s);
  std::vector<std::string> out;
  std::string word;
  while (ss >> word) out.push_back(word);
  return out;
}

double mean_of(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

template <class T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> get_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

BridgeConfig RunConfig::bridge_config() const {
  BridgeConfig c;
  c.tol = tol;
  c.max_iter = max_iter;
  return c;
}

SamplerSpec RunConfig::sampler_spec() const {
  SamplerSpec s;
  s.kind = parse_sampler_kind(sampler);
  s.rho = rho;
  s.step_scale = step_scale;
  if (chains == 0) throw Error("chain count must be positive");
  if (draws_total % chains != 0)
    throw Error("draws total " + std::to_string(draws_total) + " is not divisible by " +
                std::to_string(chains) + " chains");
  s.chains = chains;
  s.iters = draws_total / chains;
  return s;
}

json run_config_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["model"] = c.model;
  j["evaluator"] = c.evaluator;
  j["draws"] = c.draws;
  j["chain_columns"] = c.chain_columns;
  j["sampler"] = c.sampler;
  j["rho"] = c.rho;
  j["step_scale"] = c.step_scale;
  j["draws_total"] = c.draws_total;
  j["chains"] = c.chains;
  j["tol"] = c.tol;
  j["max_iter"] = c.max_iter;
  put_optional(j, "tail_count", c.tail_count);
  put_optional(j, "block_len", c.block_len);
  j["replicates"] = c.replicates;
  j["repeats"] = c.repeats;
  j["reshuffle_replicates"] = c.reshuffle_replicates;
  j["dim"] = c.dim;
  j["dof"] = c.dof;
  j["n_obs"] = c.n_obs;
  j["covariates"] = c.covariates;
  j["data_seed"] = c.data_seed;
  return j;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.model = j.value("model", c.model);
    c.evaluator = j.value("evaluator", c.evaluator);
    c.draws = j.value("draws", c.draws);
    c.chain_columns = j.value("chain_columns", c.chain_columns);
    c.sampler = j.value("sampler", c.sampler);
    c.rho = j.value("rho", c.rho);
    c.step_scale = j.value("step_scale", c.step_scale);
    c.draws_total = j.value("draws_total", c.draws_total);
    c.chains = j.value("chains", c.chains);
    c.tol = j.value("tol", c.tol);
    c.max_iter = j.value("max_iter", c.max_iter);
    c.tail_count = get_optional<std::size_t>(j, "tail_count");
    c.block_len = get_optional<std::size_t>(j, "block_len");
    c.replicates = j.value("replicates", c.replicates);
    c.repeats = j.value("repeats", c.repeats);
    c.reshuffle_replicates = j.value("reshuffle_replicates", c.reshuffle_replicates);
    c.dim = j.value("dim", c.dim);
    c.dof = j.value("dof", c.dof);
    c.n_obs = j.value("n_obs", c.n_obs);
    c.covariates = j.value("covariates", c.covariates);
    c.data_seed = j.value("data_seed", c.data_seed);
  } catch (const json::exception& e) {
    throw Error(std::string("invalid run config: ") + e.what());
  }
  return c;
}

std::shared_ptr<TargetModel> build_model(const RunConfig& c) {
  if (!c.evaluator.empty()) {
    if (!c.model.empty()) throw Error("give either a model or an evaluator, not both");
    if (c.dim == 0) throw Error("an external evaluator needs the parameter dimension");
    auto argv = split_whitespace(c.evaluator);
    return std::make_shared<ExternalModel>(c.dim, std::move(argv));
  }
  RngStream data_rng(c.data_seed, 0);
  if (c.model == "conjugate-normal") {
    const std::size_t n = c.n_obs == 0 ? 20 : c.n_obs;
    return std::make_shared<ConjugateNormalModel>(
        ConjugateNormalModel::synthetic(data_rng, n, 1.0, 1.0, 0.5));
  }
  if (c.model == "conjugate-linreg") {
    const std::size_t n = c.n_obs == 0 ? 100 : c.n_obs;
    return std::make_shared<ConjugateLinRegModel>(
        ConjugateLinRegModel::synthetic(data_rng, n, c.covariates));
  }
  if (c.model == "difficulty-dial") {
    return std::make_shared<DifficultyDialModel>(c.dim == 0 ? 2 : c.dim, c.dof);
  }
  if (c.model.empty()) throw Error("no model given");
  throw Error("unknown model '" + c.model +
              "' (expected conjugate-normal, conjugate-linreg or difficulty-dial)");
}

DrawsMatrix obtain_draws(const TargetModel& model, const RunConfig& c, RngStream& rng) {
  if (!c.draws.empty()) {
    CsvOptions opts;
    opts.chain_columns = c.chain_columns;
    DrawsMatrix d = read_draws_csv(c.draws, opts);
    if (d.dim() != model.dim())
      throw Error("draws have " + std::to_string(d.dim()) + " parameters but the model has " +
                  std::to_string(model.dim()));
    return d;
  }
  return run_sampler(model, c.sampler_spec(), rng);
}

EstimateReport run_estimate(const TargetModel& model, const DrawsMatrix& draws,
                            const BridgeConfig& config, RngStream& rng,
                            std::optional<std::size_t> tail_count) {
  EstimateReport r{estimate_log_ml(model, draws, config, rng), {}, {}};
  r.mcse = mcse_of_bridge(r.output.result);
  r.khat = khat_report(r.output.result, tail_count);
  return r;
}

std::string tail_count_note(std::size_t s) {
  const double fifth = 0.2 * static_cast<double>(s);
  const double root = 3.0 * std::sqrt(static_cast<double>(s));
  const double bound = std::min(fifth, root);
  const auto m = static_cast<std::size_t>(std::floor(bound));
  char bound_text[32];
  std::snprintf(bound_text, sizeof(bound_text), "%.3f", bound);
  std::string note = "M = floor(min(0.2 S, 3 sqrt(S))) = floor(" + std::string(bound_text) +
                     ") = " + std::to_string(m) + " for S = " + std::to_string(s);
  if (bound != std::floor(bound))
    note += "; rounding up instead would give " + std::to_string(m + 1);
  return note;
}

void write_calibration_csv(std::ostream& out, const std::vector<CalibrationRow>& rows) {
  out << "repeat_id,log_ml,mcse_log,khat_num,khat_den,ess_den,reshuffle_sd,converged\n";
  for (const auto& r : rows) {
    out << r.repeat_id << ',' << format_double(r.log_ml) << ',' << format_double(r.mcse_log) << ','
        << format_double(r.khat_num) << ',' << format_double(r.khat_den) << ','
        << format_double(r.ess_den) << ',' << (r.reshuffle_sd ? format_double(*r.reshuffle_sd) : "")
        << ',' << (r.converged ? "true" : "false") << '\n';
  }
}

std::vector<CalibrationRow> read_calibration_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("empty calibration CSV");
  if (line != "repeat_id,log_ml,mcse_log,khat_num,khat_den,ess_den,reshuffle_sd,converged")
    throw Error("unexpected calibration CSV header");
  std::vector<CalibrationRow> rows;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    const auto f = split_fields(line, ',');
    if (f.size() != 8)
      throw Error("parse error at row " + std::to_string(row_no) + ": expected 8 fields");
    CalibrationRow r;
    const double id = parse_double(f[0], row_no, 1);
    if (id < 0 || id != std::floor(id))
      throw Error("parse error at row " + std::to_string(row_no) + ", column 1");
    r.repeat_id = static_cast<std::size_t>(id);
    r.log_ml = parse_double(f[1], row_no, 2);
    r.mcse_log = parse_double(f[2], row_no, 3);
    r.khat_num = parse_double(f[3], row_no, 4);
    r.khat_den = parse_double(f[4], row_no, 5);
    r.ess_den = parse_double(f[5], row_no, 6);
    if (!f[6].empty()) r.reshuffle_sd = parse_double(f[6], row_no, 7);
    if (f[7] == "true") {
      r.converged = true;
    } else if (f[7] != "false") {
      throw Error("parse error at row " + std::to_string(row_no) + ", column 8");
    }
    rows.push_back(r);
  }
  return rows;
}

CalibrationResult calibrate(const TargetModel& model, const CalibrationConfig& config,
                            const RngStream& root) {
  if (config.repeats < 10) throw Error("calibration needs at least 10 repeats");
  CalibrationResult res;
  res.rows.resize(config.repeats);

  const std::size_t workers = std::max<std::size_t>(1, std::min(config.workers, config.repeats));
  std::vector<std::unique_ptr<TargetModel>> instances(workers);
  for (auto& inst : instances) inst = model.worker_instance();

  parallel_for(config.repeats, workers, [&](std::size_t i, std::size_t worker) {
    const TargetModel& m = instances[worker] ? *instances[worker] : model;
    const RngStream base = root.derive(i + 1);
    RngStream rng = base;
    const DrawsMatrix draws = run_sampler(m, config.sampler, rng);
    const EstimateReport est = run_estimate(m, draws, config.bridge, rng, config.tail_count);

    CalibrationRow& row = res.rows[i];
    row.repeat_id = i + 1;
    row.log_ml = est.output.result.log_ml;
    row.mcse_log = est.mcse.mcse_log;
    row.khat_num = est.khat.numerator.khat;
    row.khat_den = est.khat.denominator.khat;
    row.ess_den = est.mcse.ess_den;
    row.converged = est.output.result.converged;
    if (config.reshuffle_replicates > 0) {
      ReshuffleConfig rc;
      rc.replicates = config.reshuffle_replicates;
      rc.block_len = config.block_len;
      rc.bridge = config.bridge;
      rc.workers = 1;
      row.reshuffle_sd = reshuffle_estimates(m, draws, rc, base).sd_log;
    }
  });

  CalibrationSummary& s = res.summary;
  s.repeats = config.repeats;
  std::vector<double> log_ml, mcse, kn, kd, ess, rsd;
  for (const auto& r : res.rows) {
    log_ml.push_back(r.log_ml);
    mcse.push_back(r.mcse_log);
    kn.push_back(r.khat_num);
    kd.push_back(r.khat_den);
    ess.push_back(r.ess_den);
    if (r.reshuffle_sd) rsd.push_back(*r.reshuffle_sd);
    if (!r.converged) ++s.n_nonconverged;
  }
  s.empirical_sd = sample_sd(log_ml);
  s.mean_mcse_log = mean_of(mcse);
  s.mcse_sd_ratio = s.mean_mcse_log / s.empirical_sd;
  s.mean_khat_num = mean_of(kn);
  s.mean_khat_den = mean_of(kd);
  s.mean_ess_den = mean_of(ess);
  s.mean_log_ml = mean_of(log_ml);
  if (!rsd.empty()) {
    s.mean_reshuffle_sd = mean_of(rsd);
    s.reshuffle_sd_ratio = *s.mean_reshuffle_sd / s.empirical_sd;
  }
  if (auto oracle = model.oracle_log_ml()) {
    s.oracle_log_ml = *oracle;
    s.bias = s.mean_log_ml - *oracle;
  }
  return res;
}

json calibration_summary_to_json(const CalibrationSummary& s) {
  json j;
  j["repeats"] = s.repeats;
  j["empirical_sd"] = s.empirical_sd;
  j["mean_mcse_log"] = s.mean_mcse_log;
  j["mcse_sd_ratio"] = s.mcse_sd_ratio;
  j["mean_khat_num"] = s.mean_khat_num;
  j["mean_khat_den"] = s.mean_khat_den;
  j["mean_ess_den"] = s.mean_ess_den;
  j["mean_log_ml"] = s.mean_log_ml;
  j["n_nonconverged"] = s.n_nonconverged;
  put_optional(j, "mean_reshuffle_sd", s.mean_reshuffle_sd);
  put_optional(j, "reshuffle_sd_ratio", s.reshuffle_sd_ratio);
  put_optional(j, "oracle_log_ml", s.oracle_log_ml);
  put_optional(j, "bias", s.bias);
  return j;
}

PlanAdvice planning_helper(double current_mcse, double target_mcse) {
  if (!(current_mcse > 0.0) || !(target_mcse > 0.0))
    throw Error("MCSE values must be positive");
  const double ratio = current_mcse / target_mcse;
  const double squared = ratio * ratio;
  PlanAdvice advice;
  advice.multiplier = static_cast<std::uint64_t>(std::max(1.0, std::ceil(squared)));
  std::string msg = "at least " + std::to_string(advice.multiplier) + "x draws";
  if (squared > 1.0 && squared != std::ceil(squared))
    msg += " ((" + shortest(current_mcse) + " / " + shortest(target_mcse) + ")^2 = " +
           shortest(squared) + " rounded up; truncating would give " +
           std::to_string(advice.multiplier - 1) + ")";
  msg +=
      "; MCSE shrinks as 1/sqrt(draws) only asymptotically, and a slower pre-asymptotic "
      "rate may require more";
  advice.message = msg;
  return advice;
}

double difference_mcse(double mcse_a, double mcse_b) { return std::hypot(mcse_a, mcse_b); }

}  // namespace bridgediag
