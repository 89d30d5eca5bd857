#include <memory>
#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gar/app_config.hpp"
#include "gar/engine.hpp"
#include "gar/metrics.hpp"
#include "gar/trace_io.hpp"
#include "gar/tracegen.hpp"

namespace py = pybind11;

namespace {

gar::Trace trace_from_jsonl(const std::string& text) {
  std::istringstream in(text);
  return gar::read_trace(in, "<python>");
}

std::string trace_to_jsonl(const gar::Trace& trace) {
  std::ostringstream out;
  gar::write_trace(trace, out);
  return out.str();
}

gar::GridIntensitySeries grid_from_csv(const std::string& text) {
  std::istringstream in(text);
  return gar::GridIntensitySeries::parse_csv(in, "<python>");
}

std::unique_ptr<gar::Estimators> make_estimators(const std::string& estimators_json) {
  if (estimators_json.empty()) {
    return std::make_unique<gar::OracleEstimators>();
  }
  return std::make_unique<gar::FittedEstimators>(
      gar::FittedEstimators::from_json_string(estimators_json, "<python>"));
}

gar::AppConfig config_from_json(const std::string& config_json) {
  gar::AppConfig cfg;
  if (!config_json.empty()) {
    cfg.load_string(config_json, "<python>");
  }
  return cfg;
}

}  // namespace

PYBIND11_MODULE(gar_py, m) {
  m.doc() = "Carbon-aware LLM routing engine and trace-replay simulator";

  py::register_exception<gar::DataError>(m, "DataError");

  m.def("default_spec", [] { return gar::GenSpec::default_spec().to_json_string(); },
        "Built-in synthetic workload spec as JSON");

  m.def(
      "generate_trace",
      [](const std::string& spec_json) {
        const auto spec = spec_json.empty() ? gar::GenSpec::default_spec()
                                            : gar::GenSpec::from_json_string(spec_json, "<python>");
        auto [trace, grid] = gar::generate(spec);
        std::ostringstream grid_csv;
        for (const auto& region : grid.regions()) {
          for (const auto& [t, v] : grid.samples(region)) {
            grid_csv << t << "," << region << "," << v << "\n";
          }
        }
        return py::make_tuple(trace_to_jsonl(trace),
                              "timestamp_s,region,intensity_g_per_kwh\n" + grid_csv.str(),
                              gar::pool_to_json_string(spec.pool));
      },
      py::arg("spec_json") = "",
      "Generate a seeded trace; returns (trace_jsonl, grid_csv, pool_json)");

  m.def(
      "split_trace",
      [](const std::string& trace_jsonl, double f_test, double f_validation, double f_calibration,
         std::uint64_t seed) {
        const auto splits = gar::split(trace_from_jsonl(trace_jsonl), f_test, f_validation,
                                       f_calibration, seed);
        return py::make_tuple(trace_to_jsonl(splits.test), trace_to_jsonl(splits.validation),
                              trace_to_jsonl(splits.calibration));
      },
      py::arg("trace_jsonl"), py::arg("f_test") = 800.0 / 1200.0,
      py::arg("f_validation") = 200.0 / 1200.0, py::arg("f_calibration") = 200.0 / 1200.0,
      py::arg("seed") = 42,
      "Deterministic disjoint split; returns (test, validation, calibration) JSONL");

  m.def(
      "fit_estimators",
      [](const std::string& calibration_jsonl, const std::string& pool_json,
         const std::string& grid_csv) {
        const auto pool = gar::pool_from_json_string(pool_json, "<python>");
        const auto estimators = gar::FittedEstimators::fit(trace_from_jsonl(calibration_jsonl),
                                                           pool, grid_from_csv(grid_csv));
        return estimators.to_json_string();
      },
      py::arg("calibration_jsonl"), py::arg("pool_json"), py::arg("grid_csv"),
      "Fit quality/latency/token estimators on a calibration split; returns JSON");

  m.def(
      "simulate",
      [](const std::string& trace_jsonl, const std::string& pool_json, const std::string& grid_csv,
         const std::string& estimators_json, const std::string& config_json) {
        const auto pool = gar::pool_from_json_string(pool_json, "<python>");
        const auto trace = trace_from_jsonl(trace_jsonl);
        const auto grid = grid_from_csv(grid_csv);
        const auto estimators = make_estimators(estimators_json);
        const auto cfg = config_from_json(config_json);
        const auto result = gar::run(trace, pool, grid, *estimators, cfg.run_config());
        const auto report = gar::summarize(result.decisions, cfg.slo_config(), trace);
        py::dict out;
        out["report_json"] = report.to_json_string();
        out["decisions_jsonl"] = gar::decisions_to_jsonl(result.decisions);
        out["final_lambda"] = result.final_lambda;
        out["final_ledger_state_json"] = result.final_ledger_state;
        return out;
      },
      py::arg("trace_jsonl"), py::arg("pool_json"), py::arg("grid_csv"),
      py::arg("estimators_json") = "", py::arg("config_json") = "",
      "Replay a trace under the configured policy. Empty estimators_json selects "
      "oracle passthrough predictions; config_json uses the same schema as the "
      "CLI --config file.");

  m.def(
      "summarize",
      [](const std::string& decisions_jsonl, const std::string& trace_jsonl,
         const std::string& config_json) {
        // decisions parse back through the trace replay log format
        const auto trace = trace_from_jsonl(trace_jsonl);
        const auto cfg = config_from_json(config_json);
        std::vector<gar::RoutingDecision> decisions;
        std::istringstream in(decisions_jsonl);
        std::string line;
        while (std::getline(in, line)) {
          if (!line.empty()) decisions.push_back(gar::decision_from_json_line(line, "<python>"));
        }
        return gar::summarize(decisions, cfg.slo_config(), trace).to_json_string();
      },
      py::arg("decisions_jsonl"), py::arg("trace_jsonl"), py::arg("config_json") = "",
      "Aggregate a decision log against its trace; returns a metrics report JSON");
}
