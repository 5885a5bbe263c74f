#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <sstream>

#include "bridgediag/error.hpp"
#include "bridgediag/experiments.hpp"
#include "bridgediag/parallel.hpp"
#include "bridgediag/reshuffle.hpp"
#include "bridgediag/serialize.hpp"

namespace bridgediag::cli {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  RunConfig c;
  std::string config_path;
  std::string out;
  std::string format = "json";
  std::string csv_out;
  std::string result_path;
  bool keep_terms = false;
  double current = 0.0;
  double target = 0.0;
};

void add_model_options(CLI::App* sub, Options& o, bool allow_evaluator) {
  sub->add_option("--model", o.c.model,
                  "Built-in model: conjugate-normal, conjugate-linreg or difficulty-dial");
  if (allow_evaluator)
    sub->add_option("--evaluator", o.c.evaluator,
                    "External evaluator command (line-delimited JSON over stdin/stdout)");
  sub->add_option("--dim", o.c.dim, "Dimension (difficulty-dial, external evaluator)");
  sub->add_option("--dof", o.c.dof, "Degrees of freedom (difficulty-dial)");
  sub->add_option("--n-obs", o.c.n_obs, "Observations in the synthetic data set");
  sub->add_option("--covariates", o.c.covariates, "Covariates (conjugate-linreg)");
  sub->add_option("--data-seed", o.c.data_seed, "Seed for the synthetic data set");
}

void add_sampler_options(CLI::App* sub, Options& o, bool allow_csv) {
  if (allow_csv) {
    sub->add_option("--draws", o.c.draws, "Posterior draws CSV");
    sub->add_flag("--no-chain-cols{false}", o.c.chain_columns,
                  "The draws CSV has no chain/iteration columns (single chain)");
  }
  sub->add_option("--sampler", o.c.sampler, "exact, ar1 or rwm")
      ->check(CLI::IsMember({"exact", "ar1", "rwm"}));
  sub->add_option("--rho", o.c.rho, "AR(1) lag-1 correlation");
  sub->add_option("--step-scale", o.c.step_scale, "Random-walk step scale (default 2.4/sqrt(d))");
  sub->add_option("--draws-total", o.c.draws_total, "Posterior draws over all chains");
  sub->add_option("--chains", o.c.chains, "Number of chains");
}

void add_bridge_options(CLI::App* sub, Options& o) {
  sub->add_option("--seed", o.c.seed, "Random seed");
  sub->add_option("--tol", o.c.tol, "Relative convergence tolerance");
  sub->add_option("--max-iter", o.c.max_iter, "Maximum fixed-point iterations");
  sub->add_option("--tail-count", o.c.tail_count, "Tail size for the Pareto-k fits");
}

void add_output_options(CLI::App* sub, Options& o) {
  sub->add_option("--out", o.out, "Write the main output to this file instead of stdout");
  sub->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--config", o.config_path, "Run configuration JSON used as defaults");
}

std::string find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  try {
    return run_config_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw UsageError("invalid config file '" + path + "': " + e.what());
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

void require_model_source(const Options& o, bool allow_evaluator) {
  if (o.c.model.empty() && o.c.evaluator.empty())
    throw UsageError(allow_evaluator ? "missing --model or --evaluator" : "missing --model");
  if (!o.c.model.empty() && !o.c.evaluator.empty())
    throw UsageError("--model and --evaluator are mutually exclusive");
  if (!o.c.evaluator.empty() && o.c.dim == 0) throw UsageError("--evaluator requires --dim");
}

void require_sampler(const Options& o) {
  if (!o.c.draws.empty()) return;
  if (o.c.chains == 0) throw UsageError("--chains must be positive");
  if (o.c.draws_total % o.c.chains != 0)
    throw UsageError("--draws-total must be a multiple of --chains");
}

void emit(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(o.out, std::ios::binary);
  if (!file) throw Error("cannot write '" + o.out + "'");
  file << text;
  if (!file) throw Error("failed writing '" + o.out + "'");
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write '" + path + "'");
  file << text;
  if (!file) throw Error("failed writing '" + path + "'");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string format_number(double v) { return json(v).dump(); }

const std::vector<std::string> kSchemaKeys = {
    "log_ml",     "mcse_log",  "mcse_rel_linear", "khat_numerator", "khat_denominator",
    "ess_denominator", "iterations", "converged", "S1", "S2", "tail_count_used",
    "jitter_applied", "seed"};

std::string result_csv(const json& j) {
  std::string header;
  std::string row;
  for (std::size_t i = 0; i < kSchemaKeys.size(); ++i) {
    const auto& key = kSchemaKeys[i];
    if (i > 0) {
      header += ',';
      row += ',';
    }
    header += key;
    const json& v = j.at(key);
    if (!v.is_null()) row += v.dump();
  }
  return header + "\n" + row + "\n";
}

void warn_nonconverged(bool converged, std::ostream& err) {
  if (!converged) err << "warning: bridge iteration did not converge\n";
}

int cmd_estimate(const Options& o, std::ostream& out, std::ostream& err) {
  auto model = build_model(o.c);
  RngStream rng(o.c.seed, 0);
  const DrawsMatrix draws = obtain_draws(*model, o.c, rng);
  const EstimateReport rep = run_estimate(*model, draws, o.c.bridge_config(), rng, o.c.tail_count);
  const BridgeResult& result = rep.output.result;
  warn_nonconverged(result.converged, err);

  json j = result_json(result, rep.mcse, rep.khat,
                       {o.c.seed, rep.output.proposal.chol.jitter_applied});
  j["model"] = model->name();
  if (auto oracle = model->oracle_log_ml()) j["oracle_log_ml"] = *oracle;
  j["config"] = run_config_to_json(o.c);
  if (o.keep_terms) {
    j["bridge"] = bridge_result_to_json(result);
    j["proposal"] = proposal_to_json(rep.output.proposal);
  }
  emit(o, o.format == "csv" ? result_csv(j) : dump(j), out);
  return 0;
}

int cmd_calibrate(const Options& o, std::ostream& out, std::ostream& err) {
  auto model = build_model(o.c);
  CalibrationConfig cc;
  cc.sampler = o.c.sampler_spec();
  cc.bridge = o.c.bridge_config();
  cc.repeats = o.c.repeats;
  cc.tail_count = o.c.tail_count;
  cc.reshuffle_replicates = o.c.reshuffle_replicates;
  cc.block_len = o.c.block_len;
  cc.workers = worker_count();
  const CalibrationResult res = calibrate(*model, cc, RngStream(o.c.seed, 0));
  if (res.summary.n_nonconverged > 0)
    err << "warning: " << res.summary.n_nonconverged << " repeats did not converge\n";

  std::ostringstream csv;
  write_calibration_csv(csv, res.rows);
  json summary = calibration_summary_to_json(res.summary);
  summary["model"] = model->name();
  summary["config"] = run_config_to_json(o.c);

  json rows = json::array();
  for (const auto& r : res.rows) {
    rows.push_back({{"repeat_id", r.repeat_id},
                    {"log_ml", r.log_ml},
                    {"mcse_log", r.mcse_log},
                    {"khat_num", r.khat_num},
                    {"khat_den", r.khat_den},
                    {"ess_den", r.ess_den},
                    {"reshuffle_sd", r.reshuffle_sd ? json(*r.reshuffle_sd) : json(nullptr)},
                    {"converged", r.converged}});
  }
  if (!o.out.empty()) {
    // Rows go to the file, the summary to stdout.
    emit(o, o.format == "csv" ? csv.str() : dump(rows), out);
    out << dump(summary);
  } else if (o.format == "csv") {
    out << csv.str();
  } else {
    out << dump(json{{"summary", summary}, {"rows", rows}});
  }
  return 0;
}

std::string replicate_csv(const ReshuffleReport& r) {
  std::string s = "replicate,log_ml,converged,iterations\n";
  for (const auto& o : r.replicates) {
    s += std::to_string(o.replicate) + ',';
    if (!o.failed) s += format_number(o.log_ml);
    s += ',';
    s += (o.converged && !o.failed) ? "true" : "false";
    s += ',' + std::to_string(o.iterations) + '\n';
  }
  return s;
}

int cmd_reshuffle(const Options& o, std::ostream& out, std::ostream& err) {
  auto model = build_model(o.c);
  RngStream rng(o.c.seed, 0);
  const DrawsMatrix draws = obtain_draws(*model, o.c, rng);
  ReshuffleConfig rc;
  rc.replicates = o.c.replicates;
  rc.block_len = o.c.block_len;
  rc.bridge = o.c.bridge_config();
  rc.workers = worker_count();
  const ReshuffleReport report = reshuffle_estimates(*model, draws, rc, rng);
  if (report.n_nonconverged > 0)
    err << "warning: " << report.n_nonconverged << " replicates did not converge\n";
  if (report.n_failed > 0) err << "warning: " << report.n_failed << " replicates failed\n";

  const std::string csv = replicate_csv(report);
  if (!o.csv_out.empty()) write_text_file(o.csv_out, csv);
  if (o.format == "csv") {
    emit(o, csv, out);
    return 0;
  }
  json j = reshuffle_report_to_json(report);
  json estimates = json::array();
  for (double v : report.estimates) estimates.push_back(v);
  j["estimates"] = estimates;
  j["model"] = model->name();
  j["seed"] = o.c.seed;
  j["config"] = run_config_to_json(o.c);
  emit(o, dump(j), out);
  return 0;
}

int cmd_diagnose(const Options& o, std::ostream& out, std::ostream& err) {
  std::ifstream in(o.result_path);
  if (!in) throw UsageError("cannot open result file '" + o.result_path + "'");
  json input;
  try {
    input = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("invalid result file: " + std::string(e.what()));
  }
  const json& bridge_j = input.contains("bridge") ? input.at("bridge") : input;
  if (!bridge_j.contains("log_f1"))
    throw Error("result file has no bridge terms; rerun estimate with --keep-terms");
  const BridgeResult result = bridge_result_from_json(bridge_j);
  warn_nonconverged(result.converged, err);

  ResultContext ctx;
  if (input.contains("seed") && input.at("seed").is_number_unsigned())
    ctx.seed = input.at("seed").get<std::uint64_t>();
  if (input.contains("jitter_applied") && input.at("jitter_applied").is_number())
    ctx.jitter_applied = input.at("jitter_applied").get<double>();
  else if (input.contains("proposal"))
    ctx.jitter_applied = input.at("proposal").value("jitter", 0.0);

  const McseReport mcse = mcse_of_bridge(result);
  const KhatReport khat = khat_report(result, o.c.tail_count);
  const json j = result_json(result, mcse, khat, ctx);
  emit(o, o.format == "csv" ? result_csv(j) : dump(j), out);
  return 0;
}

int cmd_plan(const Options& o, std::ostream& out) {
  if (!(o.current > 0.0) || !(o.target > 0.0))
    throw UsageError("--current and --target must be positive");
  const PlanAdvice advice = planning_helper(o.current, o.target);
  json j;
  j["current_mcse"] = o.current;
  j["target_mcse"] = o.target;
  j["multiplier"] = advice.multiplier;
  j["message"] = advice.message;
  j["difference_mcse"] = difference_mcse(o.current, o.current);
  j["difference_note"] =
      "two independent estimates with MCSE m each give MCSE sqrt(2) m for their difference";
  if (o.format == "csv") {
    emit(o,
         "current_mcse,target_mcse,multiplier,difference_mcse\n" + format_number(o.current) + ',' +
             format_number(o.target) + ',' + std::to_string(advice.multiplier) + ',' +
             format_number(j["difference_mcse"].get<double>()) + '\n',
         out);
  } else {
    emit(o, dump(j), out);
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  try {
    const std::string config_path = find_config_path(args);
    if (!config_path.empty()) o.c = load_config(config_path);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  CLI::App app{"Bridge sampling marginal likelihood estimates with MCSE and Pareto-k diagnostics",
               "bridgediag"};
  app.require_subcommand(1);

  auto* estimate = app.add_subcommand("estimate", "Estimate log p(y) with MCSE and k-hat");
  add_model_options(estimate, o, true);
  add_sampler_options(estimate, o, true);
  add_bridge_options(estimate, o);
  add_output_options(estimate, o);
  estimate->add_flag("--keep-terms", o.keep_terms,
                     "Include the bridge terms and proposal (needed by diagnose)");

  auto* calib = app.add_subcommand("calibrate", "Repeat the estimate on fresh draws");
  add_model_options(calib, o, false);
  add_sampler_options(calib, o, false);
  add_bridge_options(calib, o);
  add_output_options(calib, o);
  calib->add_option("--repeats", o.c.repeats, "Independent repeats (at least 10)");
  calib->add_option("--reshuffle-replicates", o.c.reshuffle_replicates,
                    "Also run a block reshuffle with this many replicates per repeat");
  calib->add_option("--block-len", o.c.block_len, "Reshuffle block length");

  auto* resh = app.add_subcommand("reshuffle", "Block-reshuffle the draws and re-estimate");
  add_model_options(resh, o, true);
  add_sampler_options(resh, o, true);
  add_bridge_options(resh, o);
  add_output_options(resh, o);
  resh->add_option("--replicates", o.c.replicates, "Replicates R (at least 2)");
  resh->add_option("--block-len", o.c.block_len, "Block length (default ceil(sqrt(T)))");
  resh->add_option("--csv-out", o.csv_out, "Also write per-replicate estimates as CSV");

  auto* diag = app.add_subcommand("diagnose", "Recompute MCSE and k-hat from a saved result");
  diag->add_option("result", o.result_path, "Result JSON written by estimate --keep-terms")
      ->required();
  diag->add_option("--tail-count", o.c.tail_count, "Tail size for the Pareto-k fits");
  add_output_options(diag, o);

  auto* plan = app.add_subcommand("plan", "Draws needed to reach a target MCSE");
  plan->add_option("--current", o.current, "Current MCSE of log p(y)")->required();
  plan->add_option("--target", o.target, "Target MCSE of log p(y)")->required();
  add_output_options(plan, o);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (estimate->parsed()) {
      require_model_source(o, true);
      require_sampler(o);
      return cmd_estimate(o, out, err);
    }
    if (calib->parsed()) {
      require_model_source(o, false);
      require_sampler(o);
      if (o.c.repeats < 10) throw UsageError("--repeats must be at least 10");
      return cmd_calibrate(o, out, err);
    }
    if (resh->parsed()) {
      require_model_source(o, true);
      require_sampler(o);
      if (o.c.replicates < 2) throw UsageError("--replicates must be at least 2");
      return cmd_reshuffle(o, out, err);
    }
    if (diag->parsed()) return cmd_diagnose(o, out, err);
    if (plan->parsed()) return cmd_plan(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace bridgediag::cli
