#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gar/app_config.hpp"
#include "gar/engine.hpp"
#include "gar/metrics.hpp"
#include "gar/trace_io.hpp"
#include "gar/tracegen.hpp"

namespace {

constexpr const char* kVersion = "gar 0.1.0";

struct CommonInputs {
  std::string trace_path;
  std::string pool_path;
  std::string grid_path;
  std::vector<std::string> grid_const;  // region=value
  std::string estimators_path;
  bool oracle_estimators = false;
};

void add_common_inputs(CLI::App* cmd, CommonInputs& in, bool need_estimators) {
  cmd->add_option("--trace", in.trace_path, "trace file (JSONL)")->required();
  cmd->add_option("--pool", in.pool_path, "model pool file (JSON)")->required();
  cmd->add_option("--grid", in.grid_path, "grid intensity CSV");
  cmd->add_option("--grid-const", in.grid_const,
                  "constant grid intensity as region=value (repeatable)");
  if (need_estimators) {
    cmd->add_option("--estimators", in.estimators_path, "fitted estimators JSON");
    cmd->add_flag("--oracle-estimators", in.oracle_estimators,
                  "use realized outcomes as predictions (testing / oracle runs)");
  }
}

gar::GridIntensitySeries load_grid(const CommonInputs& in) {
  if (!in.grid_path.empty()) {
    return gar::GridIntensitySeries::load_csv(in.grid_path);
  }
  if (!in.grid_const.empty()) {
    std::map<std::string, double> values;
    for (const auto& spec : in.grid_const) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos) {
        throw gar::DataError("--grid-const expects region=value, got '" + spec + "'");
      }
      values[spec.substr(0, eq)] = std::stod(spec.substr(eq + 1));
    }
    return gar::GridIntensitySeries::constant(values);
  }
  throw gar::DataError("either --grid or --grid-const is required");
}

std::unique_ptr<gar::Estimators> load_estimators(const CommonInputs& in) {
  if (in.oracle_estimators) {
    return std::make_unique<gar::OracleEstimators>();
  }
  if (in.estimators_path.empty()) {
    throw gar::DataError("either --estimators or --oracle-estimators is required");
  }
  return std::make_unique<gar::FittedEstimators>(gar::FittedEstimators::load(in.estimators_path));
}

gar::Trace load_validated_trace(const std::string& path, const gar::ModelPool& pool) {
  gar::Trace trace = gar::read_trace_file(path);
  const auto violations = gar::validate_trace(trace, pool);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << path << ": trace validation failed (" << violations.size() << " violations):";
    for (std::size_t i = 0; i < violations.size() && i < 10; ++i) {
      msg << "\n  request " << violations[i].request_index;
      if (!violations[i].model_id.empty()) msg << " model " << violations[i].model_id;
      msg << ": " << violations[i].message;
    }
    throw gar::DataError(msg.str());
  }
  return trace;
}

void apply_ablation_names(const std::vector<std::string>& names, gar::AblationFlags& flags) {
  for (const auto& name : names) {
    if (name == "feasibility_gates" || name == "gates") {
      flags.disable_feasibility_gates = true;
    } else if (name == "carbon_estimator" || name == "carbon") {
      flags.disable_carbon_estimator = true;
    } else if (name == "accuracy_estimator" || name == "accuracy") {
      flags.disable_accuracy_estimator = true;
    } else if (name == "latency_estimator" || name == "latency") {
      flags.disable_latency_estimator = true;
    } else {
      throw gar::DataError("unknown ablation '" + name +
                           "' (expected gates|carbon|accuracy|latency)");
    }
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    throw gar::DataError("cannot write file: " + path);
  }
  out << content;
}

struct PolicyRun {
  std::string name;
  gar::RunResult result;
  gar::MetricsReport report;
};

gar::RunConfig make_run_config(const gar::AppConfig& cfg, const std::string& policy_name,
                               const gar::Trace& trace, const gar::ModelPool& pool,
                               const gar::GridIntensitySeries& grid,
                               const gar::Estimators& estimators,
                               const gar::Trace* validation_trace) {
  gar::AppConfig local = cfg;
  local.policy = policy_name;
  gar::RunConfig run_cfg = local.run_config();
  if (run_cfg.policy.variant == gar::PolicyVariant::gar_target &&
      run_cfg.policy.target_floors.empty()) {
    const gar::Trace& val = validation_trace != nullptr ? *validation_trace : trace;
    const auto tuned = gar::tune_target_floors(val, pool, grid, estimators, run_cfg.slo,
                                               cfg.desired_target_accuracy);
    run_cfg.policy.target_floors = tuned.floors;
  }
  return run_cfg;
}

int cmd_gen_trace(const std::string& spec_path, const std::string& out_trace,
                  const std::string& out_grid, const std::string& out_pool,
                  const std::string& split_prefix, bool seed_set, std::uint64_t seed) {
  gar::GenSpec spec;
  if (!spec_path.empty()) {
    std::ifstream in(spec_path);
    if (!in) {
      throw gar::DataError("cannot open spec file: " + spec_path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    spec = gar::GenSpec::from_json_string(ss.str(), spec_path);
  } else {
    spec = gar::GenSpec::default_spec();
  }
  if (seed_set) spec.seed = seed;

  auto [trace, grid] = gar::generate(spec);
  gar::write_trace_file(trace, out_trace);
  grid.write_csv(out_grid);
  if (!out_pool.empty()) {
    gar::write_pool_file(spec.pool, out_pool);
  }
  if (!split_prefix.empty()) {
    const auto splits = gar::split(trace, 800.0 / 1200.0, 200.0 / 1200.0, 200.0 / 1200.0, spec.seed);
    gar::write_trace_file(splits.test, split_prefix + ".test.jsonl");
    gar::write_trace_file(splits.validation, split_prefix + ".validation.jsonl");
    gar::write_trace_file(splits.calibration, split_prefix + ".calibration.jsonl");
  }
  std::cerr << "generated " << trace.size() << " requests over " << spec.datasets.size()
            << " datasets\n";
  return 0;
}

int cmd_calibrate(const CommonInputs& in, const std::string& out_path, bool shared_temperature) {
  const gar::ModelPool pool = gar::read_pool_file(in.pool_path);
  const gar::Trace trace = load_validated_trace(in.trace_path, pool);
  const gar::GridIntensitySeries grid = load_grid(in);
  gar::FitConfig fit_cfg;
  fit_cfg.shared_temperature = shared_temperature;
  const auto estimators = gar::FittedEstimators::fit(trace, pool, grid, fit_cfg);
  estimators.save(out_path);
  std::cerr << "fitted estimators for " << pool.size() << " models on " << trace.size()
            << " calibration requests\n";
  return 0;
}

int cmd_simulate(const CommonInputs& in, const gar::AppConfig& cfg,
                 const std::vector<std::string>& ablations, const std::string& validation_path,
                 const std::string& out_decisions, const std::string& out_report,
                 bool dump_state) {
  const gar::ModelPool pool = gar::read_pool_file(in.pool_path);
  const gar::Trace trace = load_validated_trace(in.trace_path, pool);
  const gar::GridIntensitySeries grid = load_grid(in);
  const auto estimators = load_estimators(in);

  gar::Trace validation;
  const gar::Trace* validation_ptr = nullptr;
  if (!validation_path.empty()) {
    validation = load_validated_trace(validation_path, pool);
    validation_ptr = &validation;
  }

  gar::RunConfig run_cfg =
      make_run_config(cfg, cfg.policy, trace, pool, grid, *estimators, validation_ptr);
  apply_ablation_names(ablations, run_cfg.ablations);

  const gar::RunResult result = gar::run(trace, pool, grid, *estimators, run_cfg);
  const gar::MetricsReport report = gar::summarize(result.decisions, run_cfg.slo, trace);

  if (!out_decisions.empty()) {
    gar::write_decisions_file(result.decisions, out_decisions);
  }
  if (!out_report.empty()) {
    write_text_file(out_report, report.to_json_string() + "\n");
  }
  if (dump_state) {
    std::cout << result.final_ledger_state << "\n";
  }
  std::cerr << cfg.policy << ": macro_acc=" << report.macro_accuracy
            << " co2_g=" << report.co2_g_per_request << " mean_ms=" << report.mean_latency_ms
            << " fallback=" << report.fallback_rate << "\n";
  return 0;
}

std::vector<PolicyRun> run_policies(const std::vector<std::string>& policies,
                                    const CommonInputs& in, const gar::AppConfig& cfg,
                                    const std::string& validation_path) {
  const gar::ModelPool pool = gar::read_pool_file(in.pool_path);
  const gar::Trace trace = load_validated_trace(in.trace_path, pool);
  const gar::GridIntensitySeries grid = load_grid(in);
  const auto estimators = load_estimators(in);

  gar::Trace validation;
  const gar::Trace* validation_ptr = nullptr;
  if (!validation_path.empty()) {
    validation = load_validated_trace(validation_path, pool);
    validation_ptr = &validation;
  }

  std::vector<PolicyRun> runs;
  for (const auto& name : policies) {
    gar::RunConfig run_cfg = make_run_config(cfg, name, trace, pool, grid, *estimators,
                                             validation_ptr);
    PolicyRun r;
    r.name = name;
    r.result = gar::run(trace, pool, grid, *estimators, run_cfg);
    r.report = gar::summarize(r.result.decisions, run_cfg.slo, trace);
    runs.push_back(std::move(r));
  }
  // oracle CO2 ratio when an oracle run is part of the comparison
  for (const auto& r : runs) {
    if (r.name == "oracle_feasible" && r.report.co2_g_per_request > 0.0) {
      for (auto& other : runs) {
        other.report.oracle_carbon_ratio =
            other.report.co2_g_per_request / r.report.co2_g_per_request;
      }
      break;
    }
  }
  return runs;
}

int cmd_compare(const CommonInputs& in, const gar::AppConfig& cfg, const std::string& policies_csv,
                const std::string& validation_path, const std::string& out_table,
                const std::string& out_pareto) {
  std::vector<std::string> policies;
  std::stringstream ss(policies_csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) policies.push_back(item);
  }
  if (policies.empty()) {
    throw gar::DataError("--policies produced an empty list");
  }
  const auto runs = run_policies(policies, in, cfg, validation_path);
  std::vector<std::pair<std::string, gar::MetricsReport>> reports;
  for (const auto& r : runs) reports.emplace_back(r.name, r.report);

  const std::string table = gar::comparison_table_csv(reports);
  if (!out_table.empty()) {
    write_text_file(out_table, table);
  }
  std::cout << table;
  if (!out_pareto.empty()) {
    write_text_file(out_pareto, gar::pareto_csv(reports));
  }
  return 0;
}

int cmd_sweep(const CommonInputs& in, const gar::AppConfig& cfg, const std::string& param,
              const std::string& values_csv, const std::string& validation_path,
              const std::string& out_path) {
  std::vector<double> values;
  std::stringstream ss(values_csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) values.push_back(std::stod(item));
  }
  if (values.empty()) {
    throw gar::DataError("--values produced an empty list");
  }

  std::ostringstream out;
  out << "param,value,policy,macro_accuracy,co2_g_per_request,mean_latency_ms,p95_latency_ms,"
         "latency_compliance,feasibility_coverage,fallback_rate\n";
  for (double v : values) {
    gar::AppConfig swept = cfg;
    if (param == "budget_frac") {
      swept.budget_fraction = v;
      swept.budget_g = 0.0;
    } else if (param == "budget_g") {
      swept.budget_g = v;
    } else if (param == "epsilon") {
      swept.epsilon = v;
    } else if (param == "carbon_cap") {
      swept.carbon_cap_g = v;
    } else if (param == "tau_scale") {
      swept.default_floor = cfg.default_floor * v;
      for (auto& [ds, tau] : swept.floors) tau = cfg.floors.at(ds) * v;
    } else if (param == "eta") {
      swept.eta = v;
    } else {
      throw gar::DataError("unknown sweep parameter '" + param +
                           "' (expected budget_frac|budget_g|epsilon|carbon_cap|tau_scale|eta)");
    }
    const auto runs = run_policies({swept.policy}, in, swept, validation_path);
    const auto& r = runs.front().report;
    out << param << "," << v << "," << swept.policy << "," << r.macro_accuracy << ","
        << r.co2_g_per_request << "," << r.mean_latency_ms << "," << r.p95_latency_ms << ","
        << r.latency_compliance << "," << r.feasibility_coverage << "," << r.fallback_rate
        << "\n";
  }
  if (!out_path.empty()) {
    write_text_file(out_path, out.str());
  }
  std::cout << out.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Carbon-aware LLM routing engine and trace-replay simulator"};
  app.require_subcommand(0, 1);
  app.fallthrough(true);  // knob flags may follow the subcommand name
  app.set_version_flag("--version", kVersion);

  std::string config_path;
  bool config_dump = false;
  app.add_option("--config", config_path, "JSON config file (comments allowed)");
  app.add_flag("--config-dump", config_dump, "print the resolved configuration and exit");

  // knob overrides, highest precedence
  gar::AppConfig overrides;
  auto* opt_policy = app.add_option("--policy", overrides.policy,
                                    "routing policy (largest|smallest|accmax_unconstrained|"
                                    "accmax_feasible|oracle_feasible|gar|gar_fixed|gar_eps|"
                                    "gar_target|gar_pd)");
  auto* opt_gamma_c = app.add_option("--gamma-c", overrides.gamma_c, "carbon safety margin");
  auto* opt_gamma_ell = app.add_option("--gamma-ell", overrides.gamma_ell, "latency safety margin");
  auto* opt_latency = app.add_option("--latency-target", overrides.latency_target_ms,
                                     "p95 latency target L (ms)");
  auto* opt_floor = app.add_option("--default-floor", overrides.default_floor,
                                   "default per-dataset accuracy floor");
  auto* opt_window = app.add_option("--window", overrides.window_W, "carbon ledger window W");
  auto* opt_eta = app.add_option("--eta", overrides.eta, "dual step size");
  auto* opt_budget = app.add_option("--budget", overrides.budget_g,
                                    "per-request carbon budget B (grams)");
  auto* opt_budget_frac = app.add_option("--budget-frac", overrides.budget_fraction,
                                         "B as a fraction of the Largest-LLM mean carbon");
  auto* opt_eps = app.add_option("--epsilon", overrides.epsilon, "accuracy tolerance for gar_eps");
  auto* opt_cap = app.add_option("--carbon-cap", overrides.carbon_cap_g,
                                 "per-request carbon cap for gar_fixed (grams)");
  auto* opt_alpha_q = app.add_option("--alpha-q", overrides.alpha_q, "PD quality weight");
  auto* opt_alpha_ell = app.add_option("--alpha-ell", overrides.alpha_ell, "PD latency weight");
  auto* opt_target_acc = app.add_option("--target-acc", overrides.desired_target_accuracy,
                                        "desired accuracy for gar_target floor tuning");
  auto* opt_seed = app.add_option("--seed", overrides.seed, "seed");
  bool no_latency_margin = false;
  app.add_flag("--no-latency-margin", no_latency_margin,
               "disable the latency safety margin in feasibility checks");
  bool strict_bw = false;
  app.add_flag("--strict-bw", strict_bw,
               "use the full B*W threshold in the dual update even before the window fills");

  // gen-trace
  auto* gen = app.add_subcommand("gen-trace", "generate a seeded synthetic trace");
  std::string gen_spec, gen_out_trace, gen_out_grid, gen_out_pool, gen_split_prefix;
  gen->add_option("--spec", gen_spec, "generator spec JSON (default: built-in 5-model pool)");
  gen->add_option("--out-trace", gen_out_trace, "output trace JSONL")->required();
  gen->add_option("--out-grid", gen_out_grid, "output grid intensity CSV")->required();
  gen->add_option("--out-pool", gen_out_pool, "output pool JSON");
  gen->add_option("--split", gen_split_prefix,
                  "also write <prefix>.{test,validation,calibration}.jsonl splits");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "fit estimators on a calibration trace");
  CommonInputs cal_in;
  add_common_inputs(cal, cal_in, false);
  std::string cal_out;
  bool cal_shared_temp = false;
  cal->add_option("--out", cal_out, "output estimators JSON")->required();
  cal->add_flag("--shared-temperature", cal_shared_temp,
                "fit one temperature across models instead of per model");

  // simulate
  auto* sim = app.add_subcommand("simulate", "replay a trace under one policy");
  CommonInputs sim_in;
  add_common_inputs(sim, sim_in, true);
  std::vector<std::string> sim_ablations;
  std::string sim_validation, sim_out, sim_report;
  bool sim_dump_state = false;
  sim->add_option("--ablate", sim_ablations,
                  "disable a component: gates|carbon|accuracy|latency (repeatable)");
  sim->add_option("--validation-trace", sim_validation,
                  "validation trace for gar_target floor tuning");
  sim->add_option("--out", sim_out, "output decisions JSONL");
  sim->add_option("--report", sim_report, "output metrics report JSON");
  sim->add_flag("--dump-state", sim_dump_state, "print final ledger state as JSON");

  // compare
  auto* cmp = app.add_subcommand("compare", "run several policies on one trace");
  CommonInputs cmp_in;
  add_common_inputs(cmp, cmp_in, true);
  std::string cmp_policies =
      "largest,smallest,accmax_unconstrained,accmax_feasible,oracle_feasible,gar,gar_fixed,"
      "gar_eps,gar_target,gar_pd";
  std::string cmp_validation, cmp_table, cmp_pareto;
  cmp->add_option("--policies", cmp_policies, "comma-separated policy list");
  cmp->add_option("--validation-trace", cmp_validation,
                  "validation trace for gar_target floor tuning");
  cmp->add_option("--table", cmp_table, "output comparison table CSV");
  cmp->add_option("--pareto", cmp_pareto, "output Pareto CSV with dominance flags");

  // sweep
  auto* swp = app.add_subcommand("sweep", "vary one parameter over a grid");
  CommonInputs swp_in;
  add_common_inputs(swp, swp_in, true);
  std::string swp_param, swp_values, swp_validation, swp_out;
  swp->add_option("--param", swp_param,
                  "parameter to sweep: budget_frac|budget_g|epsilon|carbon_cap|tau_scale|eta")
      ->required();
  swp->add_option("--values", swp_values, "comma-separated values")->required();
  swp->add_option("--validation-trace", swp_validation,
                  "validation trace for gar_target floor tuning");
  swp->add_option("--out", swp_out, "output long-format CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    gar::AppConfig cfg;
    if (!config_path.empty()) {
      cfg.load_file(config_path);
    }
    if (*opt_policy) cfg.policy = overrides.policy;
    if (*opt_gamma_c) cfg.gamma_c = overrides.gamma_c;
    if (*opt_gamma_ell) cfg.gamma_ell = overrides.gamma_ell;
    if (*opt_latency) cfg.latency_target_ms = overrides.latency_target_ms;
    if (*opt_floor) cfg.default_floor = overrides.default_floor;
    if (*opt_window) cfg.window_W = overrides.window_W;
    if (*opt_eta) cfg.eta = overrides.eta;
    if (*opt_budget) cfg.budget_g = overrides.budget_g;
    if (*opt_budget_frac) cfg.budget_fraction = overrides.budget_fraction;
    if (*opt_eps) cfg.epsilon = overrides.epsilon;
    if (*opt_cap) cfg.carbon_cap_g = overrides.carbon_cap_g;
    if (*opt_alpha_q) cfg.alpha_q = overrides.alpha_q;
    if (*opt_alpha_ell) cfg.alpha_ell = overrides.alpha_ell;
    if (*opt_target_acc) cfg.desired_target_accuracy = overrides.desired_target_accuracy;
    if (*opt_seed) cfg.seed = overrides.seed;
    if (no_latency_margin) cfg.latency_margin_enabled = false;
    if (strict_bw) cfg.strict_bw = true;

    if (config_dump) {
      std::cout << cfg.dump_json() << "\n";
      return 0;
    }

    if (gen->parsed()) {
      return cmd_gen_trace(gen_spec, gen_out_trace, gen_out_grid, gen_out_pool, gen_split_prefix,
                           static_cast<bool>(*opt_seed), cfg.seed);
    }
    if (cal->parsed()) {
      return cmd_calibrate(cal_in, cal_out, cal_shared_temp);
    }
    if (sim->parsed()) {
      return cmd_simulate(sim_in, cfg, sim_ablations, sim_validation, sim_out, sim_report,
                          sim_dump_state);
    }
    if (cmp->parsed()) {
      return cmd_compare(cmp_in, cfg, cmp_policies, cmp_validation, cmp_table, cmp_pareto);
    }
    if (swp->parsed()) {
      return cmd_sweep(swp_in, cfg, swp_param, swp_values, swp_validation, swp_out);
    }

    std::cerr << app.help();
    return 1;
  } catch (const gar::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
