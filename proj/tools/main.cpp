// Copyright 2026 The Poolclr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "poolclr/clr.hpp"
#include "poolclr/csv.hpp"
#include "poolclr/design.hpp"
#include "poolclr/errors.hpp"
#include "poolclr/model.hpp"
#include "poolclr/pooling.hpp"
#include "poolclr/protocol.hpp"
#include "poolclr/report.hpp"
#include "poolclr/sim.hpp"

namespace {

using poolclr::Errc;
using poolclr::Error;

// Values from a --config JSON file fill in flags the command line left at
// their defaults; explicit flags always win. Keys mirror the long flag
// names without the leading dashes.
class ConfigOverlay {
 public:
  ConfigOverlay(const CLI::App* cmd, const std::string& path) : cmd_(cmd) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) {
      throw Error(Errc::kIoError, "cannot open config '" + path + "'");
    }
    try {
      in >> values_;
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::kParseError,
                  "config '" + path + "' is not valid JSON: " + e.what());
    }
    if (!values_.is_object()) {
      throw Error(Errc::kParseError,
                  "config '" + path + "' must hold a JSON object");
    }
  }

  template <typename T>
  void apply(const std::string& flag, T& target) const {
    const std::string key = flag.substr(2);
    if (cmd_->count(flag) > 0 || !values_.contains(key)) return;
    try {
      target = values_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw Error(Errc::kConfigError,
                  "config key '" + key + "' has the wrong type");
    }
  }

  bool provides(const std::string& flag) const {
    return values_.contains(flag.substr(2));
  }

 private:
  const CLI::App* cmd_;
  nlohmann::json values_ = nlohmann::json::object();
};

std::uint64_t fresh_seed() {
  std::random_device device;
  return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& warning : warnings) {
    std::cerr << "warning: " << warning << '\n';
  }
}

poolclr::Cohort read_cohort(const std::string& path) {
  const poolclr::CohortCsv csv = poolclr::read_cohort_csv_file(path);
  std::vector<std::string> warnings;
  poolclr::Cohort cohort =
      poolclr::validate_cohort(csv.covariate_names, csv.rows, &warnings);
  print_warnings(warnings);
  return cohort;
}

std::vector<poolclr::TermSpec> resolve_terms(
    const std::vector<std::string>& term_strings,
    const std::vector<std::string>& fallback_covariates) {
  std::vector<poolclr::TermSpec> terms;
  if (term_strings.empty()) {
    for (const std::string& name : fallback_covariates) {
      terms.push_back(poolclr::parse_term_spec(name));
    }
    if (terms.empty()) {
      throw Error(Errc::kConfigError,
                  "no --term given and the input has no covariates");
    }
    return terms;
  }
  terms.reserve(term_strings.size());
  for (const std::string& text : term_strings) {
    terms.push_back(poolclr::parse_term_spec(text));
  }
  return terms;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    throw Error(Errc::kIoError, "cannot open '" + path + "' for writing");
  }
  out << content;
  if (!out) {
    throw Error(Errc::kIoError, "failed writing '" + path + "'");
  }
}

std::map<std::string, std::string> read_labels_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::kIoError, "cannot open '" + path + "' for reading");
  }
  std::map<std::string, std::string> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw Error(Errc::kParseError,
                  path + ":" + std::to_string(line_no) +
                      ": expected 'stratum_id,label'");
    }
    const std::string key = line.substr(0, comma);
    if (line_no == 1 && key == "stratum_id") continue;
    labels[key] = line.substr(comma + 1);
  }
  return labels;
}

poolclr::CaseDraw parse_case_draw_flag(const std::string& name) {
  if (name == "bernoulli-rejection") {
    return poolclr::CaseDraw::kBernoulliRejection;
  }
  if (name == "conditional") return poolclr::CaseDraw::kConditional;
  throw Error(Errc::kConfigError,
              "unknown case-draw mode '" + name +
                  "'; expected bernoulli-rejection or conditional");
}

poolclr::PoolPlan make_plan(int n_sets, int pool_size,
                            poolclr::PoolPolicy policy, int secondary_min) {
  if (pool_size == 1) {
    poolclr::PoolPlan plan;
    plan.blocks = {poolclr::PoolBlock{1, n_sets}};
    plan.policy = policy;
    return plan;
  }
  return poolclr::plan_pools(n_sets, pool_size, policy, secondary_min);
}

struct FitArgs {
  std::string input;
  std::vector<std::string> terms;
  std::string out;
  std::string config;
  double tol = 1e-8;
  int max_iter = 50;
  double ci_level = 0.95;
};

int cmd_fit(const CLI::App* cmd, FitArgs args) {
  const ConfigOverlay config(cmd, args.config);
  config.apply("--input", args.input);
  config.apply("--term", args.terms);
  config.apply("--out", args.out);
  config.apply("--tol", args.tol);
  config.apply("--max-iter", args.max_iter);
  config.apply("--ci-level", args.ci_level);
  if (args.input.empty()) {
    throw Error(Errc::kConfigError, "--input is required");
  }

  poolclr::ConditionalDesign design;
  if (poolclr::is_pooled_csv_file(args.input)) {
    if (!args.terms.empty()) {
      throw Error(Errc::kConfigError,
                  "pooled input carries its term columns; --term is only "
                  "for cohort input");
    }
    design = poolclr::read_pooled_csv_file(args.input);
  } else {
    const poolclr::Cohort cohort = read_cohort(args.input);
    const std::vector<poolclr::TermSpec> terms =
        resolve_terms(args.terms, cohort.covariate_names);
    design = poolclr::build_design(cohort, terms);
  }

  poolclr::FitOptions options;
  options.tol = args.tol;
  options.max_iter = args.max_iter;
  options.ci_level = args.ci_level;
  const poolclr::FitResult result = poolclr::fit(design, options);

  std::cout << poolclr::render_fit_table(result);
  if (!args.out.empty()) {
    write_text_file(args.out, poolclr::fit_result_to_json(result).dump(2) +
                                  "\n");
  }
  if (!result.converged) {
    std::cerr << "error: " << poolclr::errc_name(Errc::kNotConverged)
              << ": gradient norm " << result.gradient_norm << " after "
              << result.iterations << " iterations\n";
    return poolclr::errc_exit_code(Errc::kNotConverged);
  }
  return 0;
}

struct PoolArgs {
  std::string input;
  std::vector<std::string> terms;
  int pool_size = 5;
  std::string policy = "cover-all";
  int secondary_min = 3;
  std::optional<std::uint64_t> seed;
  std::string labels;
  std::string out;
  std::string assignment_out;
  std::string config;
};

int cmd_pool(const CLI::App* cmd, PoolArgs args) {
  const ConfigOverlay config(cmd, args.config);
  config.apply("--input", args.input);
  config.apply("--term", args.terms);
  config.apply("--pool-size", args.pool_size);
  config.apply("--policy", args.policy);
  config.apply("--secondary-min", args.secondary_min);
  config.apply("--labels", args.labels);
  config.apply("--out", args.out);
  config.apply("--assignment-out", args.assignment_out);
  if (!args.seed && config.provides("--seed")) {
    std::uint64_t from_config = 0;
    config.apply("--seed", from_config);
    args.seed = from_config;
  }
  if (args.input.empty()) {
    throw Error(Errc::kConfigError, "--input is required");
  }

  const poolclr::Cohort cohort = read_cohort(args.input);
  const std::vector<poolclr::TermSpec> terms =
      resolve_terms(args.terms, cohort.covariate_names);
  const poolclr::PoolPolicy policy = poolclr::parse_pool_policy(args.policy);
  const poolclr::PoolPlan plan =
      make_plan(static_cast<int>(cohort.n_sets()), args.pool_size, policy,
                args.secondary_min);

  const std::uint64_t seed = args.seed ? *args.seed : fresh_seed();
  // The pooled CSV may be streaming to stdout, so bookkeeping stays on
  // stderr where a redirect cannot capture it into the data file.
  std::cerr << "seed: " << seed << '\n';
  std::cerr << "plan: " << poolclr::plan_summary(plan) << '\n';
  print_warnings(poolclr::plan_warnings(plan, terms));

  std::map<std::string, std::string> labels;
  if (!args.labels.empty()) labels = read_labels_csv(args.labels);

  const poolclr::PoolAssignment assignment = poolclr::assign_pools(
      cohort, plan, seed, labels, args.secondary_min);
  const poolclr::PooledDesign pooled =
      poolclr::aggregate(cohort, assignment, terms);

  if (args.out.empty()) {
    poolclr::write_pooled_csv(std::cout, pooled);
  } else {
    std::ofstream out(args.out);
    if (!out) {
      throw Error(Errc::kIoError,
                  "cannot open '" + args.out + "' for writing");
    }
    poolclr::write_pooled_csv(out, pooled);
  }
  if (!args.assignment_out.empty()) {
    write_text_file(args.assignment_out,
                    poolclr::assignment_to_json(plan, assignment).dump(2) +
                        "\n");
  }
  return 0;
}

struct ProtocolArgs {
  std::string nodes_dir;
  std::vector<std::string> terms;
  int pool_size = 5;
  std::string policy = "cover-all";
  int secondary_min = 3;
  std::optional<std::uint64_t> seed;
  std::string center_id = "ac";
  std::string out;
  std::string transcript_path;
  std::string config;
};

int cmd_protocol(const CLI::App* cmd, ProtocolArgs args) {
  const ConfigOverlay config(cmd, args.config);
  config.apply("--nodes", args.nodes_dir);
  config.apply("--term", args.terms);
  config.apply("--pool-size", args.pool_size);
  config.apply("--policy", args.policy);
  config.apply("--secondary-min", args.secondary_min);
  config.apply("--center-id", args.center_id);
  config.apply("--out", args.out);
  config.apply("--transcript", args.transcript_path);
  if (!args.seed && config.provides("--seed")) {
    std::uint64_t from_config = 0;
    config.apply("--seed", from_config);
    args.seed = from_config;
  }
  if (args.nodes_dir.empty()) {
    throw Error(Errc::kConfigError, "--nodes is required");
  }

  namespace fs = std::filesystem;
  std::vector<fs::path> node_files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(args.nodes_dir, ec)) {
    if (entry.path().extension() == ".csv") {
      node_files.push_back(entry.path());
    }
  }
  if (ec || node_files.empty()) {
    throw Error(Errc::kNodeUnreachable,
                "no node cohort files (*.csv) under '" + args.nodes_dir +
                    "'");
  }
  std::sort(node_files.begin(), node_files.end());

  std::vector<std::pair<std::string, poolclr::Cohort>> shards;
  shards.reserve(node_files.size());
  for (const fs::path& path : node_files) {
    shards.emplace_back(path.stem().string(), read_cohort(path.string()));
  }

  poolclr::ProtocolConfig protocol_config;
  protocol_config.pool_size = args.pool_size;
  protocol_config.policy = poolclr::parse_pool_policy(args.policy);
  protocol_config.secondary_min = args.secondary_min;
  protocol_config.seed = args.seed ? *args.seed : fresh_seed();
  protocol_config.center_id = args.center_id;
  std::vector<std::string> fallback;
  if (!shards.empty()) fallback = shards.front().second.covariate_names;
  protocol_config.terms = resolve_terms(args.terms, fallback);

  std::cout << "seed: " << protocol_config.seed << '\n';

  poolclr::Transcript transcript;
  poolclr::ProtocolResult result;
  try {
    result = poolclr::run_protocol(shards, protocol_config, &transcript);
  } catch (...) {
    if (!args.transcript_path.empty()) {
      write_text_file(args.transcript_path, transcript.to_jsonl());
    }
    throw;
  }
  if (!args.transcript_path.empty()) {
    write_text_file(args.transcript_path, transcript.to_jsonl());
  }

  print_warnings(result.enumeration.warnings);
  std::cout << "plan: " << poolclr::plan_summary(result.plan) << '\n';
  print_warnings(poolclr::plan_warnings(result.plan, protocol_config.terms));
  std::cout << poolclr::render_fit_table(result.fit);
  if (!args.out.empty()) {
    write_text_file(args.out,
                    poolclr::fit_result_to_json(result.fit).dump(2) + "\n");
  }
  if (!result.fit.converged) {
    std::cerr << "error: " << poolclr::errc_name(Errc::kNotConverged)
              << ": the distributed fit did not converge\n";
    return poolclr::errc_exit_code(Errc::kNotConverged);
  }
  return 0;
}

struct SimulateArgs {
  poolclr::SimParams params;
  std::optional<std::uint64_t> seed;
  std::string case_draw = "bernoulli-rejection";
  int threads = 0;
  std::string out;
  int scatter_g = 0;
  std::string scatter_out;
  std::string config;
};

int cmd_simulate(const CLI::App* cmd, SimulateArgs args) {
  const ConfigOverlay config(cmd, args.config);
  config.apply("--sets", args.params.n_sets);
  config.apply("--controls", args.params.m);
  config.apply("--reps", args.params.reps);
  config.apply("--beta", args.params.beta);
  config.apply("--gamma", args.params.gamma);
  config.apply("--delta", args.params.delta);
  config.apply("--omega", args.params.omega);
  config.apply("--theta", args.params.theta);
  config.apply("--pool-sizes", args.params.poolsizes);
  config.apply("--case-draw", args.case_draw);
  config.apply("--threads", args.threads);
  config.apply("--out", args.out);
  config.apply("--scatter-g", args.scatter_g);
  config.apply("--scatter-out", args.scatter_out);
  if (!args.seed && config.provides("--seed")) {
    std::uint64_t from_config = 0;
    config.apply("--seed", from_config);
    args.seed = from_config;
  }

  args.params.case_draw = parse_case_draw_flag(args.case_draw);
  args.params.seed = args.seed ? *args.seed : fresh_seed();
  std::cout << "seed: " << args.params.seed << '\n';

  const poolclr::SimulationReport report =
      poolclr::run_monte_carlo(args.params, args.threads);
  std::cout << poolclr::render_sim_table(report);
  if (!args.out.empty()) {
    write_text_file(args.out, poolclr::sim_report_to_json(report).dump() +
                                  "\n");
  }
  if (!args.scatter_out.empty()) {
    const int g = args.scatter_g != 0
                      ? args.scatter_g
                      : (args.params.poolsizes.empty()
                             ? 0
                             : args.params.poolsizes.front());
    std::ofstream out(args.scatter_out);
    if (!out) {
      throw Error(Errc::kIoError,
                  "cannot open '" + args.scatter_out + "' for writing");
    }
    poolclr::scatter_export(report, g, out);
  }
  return 0;
}

struct ReportArgs {
  std::vector<std::string> inputs;
  std::vector<std::string> labels;
  bool markdown = false;
  std::string config;
};

int cmd_report(const CLI::App* cmd, ReportArgs args) {
  const ConfigOverlay config(cmd, args.config);
  config.apply("--input", args.inputs);
  config.apply("--label", args.labels);
  if (args.inputs.empty()) {
    throw Error(Errc::kConfigError, "--input is required");
  }
  if (!args.labels.empty() && args.labels.size() != args.inputs.size()) {
    throw Error(Errc::kConfigError,
                "--label count must match --input count");
  }

  std::vector<nlohmann::json> documents;
  documents.reserve(args.inputs.size());
  for (const std::string& path : args.inputs) {
    std::ifstream in(path);
    if (!in) {
      throw Error(Errc::kIoError, "cannot open '" + path + "' for reading");
    }
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::kParseError,
                  "'" + path + "' is not valid JSON: " + e.what());
    }
    documents.push_back(std::move(j));
  }

  if (documents.size() == 1 && documents.front().contains("analyses")) {
    std::cout << poolclr::render_sim_table(
        poolclr::sim_report_from_json(documents.front()), args.markdown);
    return 0;
  }

  std::vector<poolclr::FitResult> fits;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < documents.size(); ++i) {
    if (documents[i].contains("analyses")) {
      throw Error(Errc::kConfigError,
                  "'" + args.inputs[i] +
                      "' holds a simulation report; compare fit results "
                      "only");
    }
    fits.push_back(poolclr::fit_result_from_json(documents[i]));
    labels.push_back(args.labels.empty()
                         ? std::filesystem::path(args.inputs[i])
                               .stem()
                               .string()
                         : args.labels[i]);
  }
  if (fits.size() == 1) {
    std::cout << poolclr::render_fit_table(fits.front());
  } else {
    std::cout << poolclr::render_fit_comparison(labels, fits, args.markdown);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Estimates individual-level odds ratios from matched case-control "
      "data whose covariates are shared only as pooled aggregates"};
  app.require_subcommand(1);
  int exit_status = 0;

  auto* fit_cmd = app.add_subcommand(
      "fit", "Fit conditional logistic regression to a cohort or pooled CSV");
  auto fit_args = std::make_shared<FitArgs>();
  fit_cmd->add_option("--input", fit_args->input,
                      "Cohort CSV or pooled CSV to fit");
  fit_cmd->add_option("--term", fit_args->terms,
                      "Model term (repeatable), e.g. IA or log(age):marker");
  fit_cmd->add_option("--out", fit_args->out, "Write the fit result JSON here");
  fit_cmd->add_option("--tol", fit_args->tol,
                      "Convergence tolerance on the score max-norm");
  fit_cmd->add_option("--max-iter", fit_args->max_iter,
                      "Newton iteration cap");
  fit_cmd->add_option("--ci-level", fit_args->ci_level,
                      "Two-sided confidence level");
  fit_cmd->add_option("--config", fit_args->config,
                      "JSON file mirroring these flags");
  fit_cmd->callback(
      [&, fit_args]() { exit_status = cmd_fit(fit_cmd, *fit_args); });

  auto* pool_cmd = app.add_subcommand(
      "pool", "Randomly pool matched sets and aggregate term values");
  auto pool_args = std::make_shared<PoolArgs>();
  pool_cmd->add_option("--input", pool_args->input, "Cohort CSV to pool");
  pool_cmd->add_option("--term", pool_args->terms,
                       "Term column for the pooled output (repeatable; "
                       "default: every covariate)");
  pool_cmd->add_option("--pool-size", pool_args->pool_size,
                       "Matched sets per pool (g)");
  pool_cmd->add_option("--policy", pool_args->policy,
                       "cover-all or drop-remainder");
  pool_cmd->add_option("--secondary-min", pool_args->secondary_min,
                       "Smallest allowed secondary pool size");
  pool_cmd->add_option("--seed", pool_args->seed,
                       "Partition seed (generated and printed when absent)");
  pool_cmd->add_option("--labels", pool_args->labels,
                       "CSV of stratum_id,label for stratified pooling");
  pool_cmd->add_option("--out", pool_args->out,
                       "Pooled CSV path (stdout when absent)");
  pool_cmd->add_option("--assignment-out", pool_args->assignment_out,
                       "Write the pool assignment JSON here");
  pool_cmd->add_option("--config", pool_args->config,
                       "JSON file mirroring these flags");
  pool_cmd->callback(
      [&, pool_args]() { exit_status = cmd_pool(pool_cmd, *pool_args); });

  auto* protocol_cmd = app.add_subcommand(
      "protocol",
      "Run the distributed aggregation protocol over per-node cohort CSVs");
  auto protocol_args = std::make_shared<ProtocolArgs>();
  protocol_cmd->add_option("--nodes", protocol_args->nodes_dir,
                           "Directory of per-node cohort CSVs (node id = "
                           "file stem)");
  protocol_cmd->add_option("--term", protocol_args->terms,
                           "Model term (repeatable; default: every "
                           "covariate)");
  protocol_cmd->add_option("--pool-size", protocol_args->pool_size,
                           "Matched sets per pool (g)");
  protocol_cmd->add_option("--policy", protocol_args->policy,
                           "cover-all or drop-remainder");
  protocol_cmd->add_option("--secondary-min", protocol_args->secondary_min,
                           "Smallest allowed secondary pool size");
  protocol_cmd->add_option("--seed", protocol_args->seed,
                           "Plan seed (generated and printed when absent)");
  protocol_cmd->add_option("--center-id", protocol_args->center_id,
                           "Analytical center actor id");
  protocol_cmd->add_option("--out", protocol_args->out,
                           "Write the fit result JSON here");
  protocol_cmd->add_option("--transcript", protocol_args->transcript_path,
                           "Write the message transcript JSONL here");
  protocol_cmd->add_option("--config", protocol_args->config,
                           "JSON file mirroring these flags");
  protocol_cmd->callback([&, protocol_args]() {
    exit_status = cmd_protocol(protocol_cmd, *protocol_args);
  });

  auto* simulate_cmd = app.add_subcommand(
      "simulate", "Monte Carlo comparison of unpooled and pooled fits");
  auto simulate_args = std::make_shared<SimulateArgs>();
  simulate_cmd->add_option("--sets", simulate_args->params.n_sets,
                           "Matched sets per replicate");
  simulate_cmd->add_option("--controls", simulate_args->params.m,
                           "Controls per case");
  simulate_cmd->add_option("--reps", simulate_args->params.reps,
                           "Replicates");
  simulate_cmd->add_option("--beta", simulate_args->params.beta,
                           "True log-OR for U");
  simulate_cmd->add_option("--gamma", simulate_args->params.gamma,
                           "True log-OR for X");
  simulate_cmd->add_option("--delta", simulate_args->params.delta,
                           "True log-OR for Z1");
  simulate_cmd->add_option("--omega", simulate_args->params.omega,
                           "True log-OR for Z2");
  simulate_cmd->add_option("--theta", simulate_args->params.theta,
                           "True log-OR for U:Z2");
  simulate_cmd
      ->add_option("--pool-sizes", simulate_args->params.poolsizes,
                   "Pool sizes to compare, e.g. 4,6,10")
      ->delimiter(',');
  simulate_cmd->add_option("--seed", simulate_args->seed,
                           "Simulation seed (generated and printed when "
                           "absent)");
  simulate_cmd->add_option("--case-draw", simulate_args->case_draw,
                           "bernoulli-rejection or conditional");
  simulate_cmd->add_option("--threads", simulate_args->threads,
                           "Worker threads (0 = hardware)");
  simulate_cmd->add_option("--out", simulate_args->out,
                           "Write the report JSON here");
  simulate_cmd->add_option("--scatter-g", simulate_args->scatter_g,
                           "Pool size for --scatter-out pairs");
  simulate_cmd->add_option("--scatter-out", simulate_args->scatter_out,
                           "Write per-rep unpooled/pooled estimate pairs "
                           "here");
  simulate_cmd->add_option("--config", simulate_args->config,
                           "JSON file mirroring these flags");
  simulate_cmd->callback([&, simulate_args]() {
    exit_status = cmd_simulate(simulate_cmd, *simulate_args);
  });

  auto* report_cmd = app.add_subcommand(
      "report", "Render fit or simulation JSON as aligned tables");
  auto report_args = std::make_shared<ReportArgs>();
  report_cmd->add_option("--input", report_args->inputs,
                         "Fit result or simulation report JSON "
                         "(repeatable for side-by-side fits)");
  report_cmd->add_option("--label", report_args->labels,
                         "Column label per --input");
  report_cmd->add_flag("--markdown", report_args->markdown,
                       "Emit a markdown table");
  report_cmd->add_option("--config", report_args->config,
                         "JSON file mirroring these flags");
  report_cmd->callback([&, report_args]() {
    exit_status = cmd_report(report_cmd, *report_args);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return exit_status;
}
