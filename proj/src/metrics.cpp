#include "gar/metrics.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

namespace gar {

using nlohmann::json;

std::string MetricsReport::to_json_string() const {
  json obj{{"macro_accuracy", macro_accuracy},
           {"co2_g_per_request", co2_g_per_request},
           {"mean_latency_ms", mean_latency_ms},
           {"p95_latency_ms", p95_latency_ms},
           {"latency_compliance", latency_compliance},
           {"feasibility_coverage", feasibility_coverage},
           {"fallback_rate", fallback_rate},
           {"per_dataset_accuracy", per_dataset_accuracy},
           {"n_requests", n_requests}};
  if (oracle_carbon_ratio.has_value()) {
    obj["oracle_carbon_ratio"] = *oracle_carbon_ratio;
  }
  return obj.dump(2);
}

MetricsReport summarize(const std::vector<RoutingDecision>& decisions, const SLOConfig& slo,
                        const Trace& trace, std::optional<double> oracle_co2_g_per_request) {
  if (decisions.empty()) {
    throw DataError("summarize: empty decision log");
  }
  if (decisions.size() != trace.requests.size()) {
    throw DataError("summarize: decision log does not align with trace (" +
                    std::to_string(decisions.size()) + " decisions vs " +
                    std::to_string(trace.requests.size()) + " requests)");
  }

  MetricsReport report;
  report.n_requests = static_cast<long>(decisions.size());

  std::map<std::string, std::pair<long, long>> per_dataset;  // correct, total
  double carbon_total = 0.0;
  double latency_total = 0.0;
  std::vector<double> latencies;
  long compliant = 0, covered = 0, fallbacks = 0;
  latencies.reserve(decisions.size());

  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const auto& d = decisions[i];
    const auto& req = trace.requests[i];
    if (d.request_index != req.request_index) {
      throw DataError("summarize: decision/request index mismatch at position " +
                      std::to_string(i));
    }
    auto& acc = per_dataset[req.dataset_id];
    acc.first += d.realized.correct ? 1 : 0;
    acc.second += 1;
    carbon_total += d.realized.carbon_g;
    latency_total += d.realized.latency_ms;
    latencies.push_back(d.realized.latency_ms);
    if (d.realized.latency_ms <= slo.latency_target_ms) ++compliant;
    if (!d.feasible_model_ids.empty()) ++covered;
    if (d.used_fallback) ++fallbacks;
  }

  const double n = static_cast<double>(decisions.size());
  double acc_sum = 0.0;
  for (const auto& [dataset, counts] : per_dataset) {
    const double a = static_cast<double>(counts.first) / static_cast<double>(counts.second);
    report.per_dataset_accuracy[dataset] = a;
    acc_sum += a;
  }
  report.macro_accuracy = acc_sum / static_cast<double>(per_dataset.size());
  report.co2_g_per_request = carbon_total / n;
  report.mean_latency_ms = latency_total / n;
  report.p95_latency_ms = nearest_rank_quantile(latencies, 0.95);
  report.latency_compliance = static_cast<double>(compliant) / n;
  report.feasibility_coverage = static_cast<double>(covered) / n;
  report.fallback_rate = static_cast<double>(fallbacks) / n;
  if (oracle_co2_g_per_request.has_value()) {
    if (!(*oracle_co2_g_per_request > 0.0)) {
      throw DataError("summarize: oracle CO2 must be > 0 for the carbon ratio");
    }
    report.oracle_carbon_ratio = report.co2_g_per_request / *oracle_co2_g_per_request;
  }
  return report;
}

std::vector<ParetoRow> pareto_flags(
    const std::vector<std::pair<std::string, MetricsReport>>& reports) {
  if (reports.empty()) {
    throw DataError("pareto_flags: no reports");
  }
  std::vector<ParetoRow> rows;
  rows.reserve(reports.size());
  for (const auto& [name, r] : reports) {
    rows.push_back({name, r.macro_accuracy, r.co2_g_per_request, false});
  }
  // a dominates b when a is at least as good on both axes and strictly
  // better on one; exact ties are nondominated
  for (auto& b : rows) {
    for (const auto& a : rows) {
      if (&a == &b) continue;
      const bool geq = a.macro_accuracy >= b.macro_accuracy &&
                       a.co2_g_per_request <= b.co2_g_per_request;
      const bool strict = a.macro_accuracy > b.macro_accuracy ||
                          a.co2_g_per_request < b.co2_g_per_request;
      if (geq && strict) {
        b.dominated = true;
        break;
      }
    }
  }
  return rows;
}

std::string pareto_csv(const std::vector<std::pair<std::string, MetricsReport>>& reports) {
  std::ostringstream out;
  out << "policy,macro_accuracy,co2_g_per_request,dominated\n";
  for (const auto& row : pareto_flags(reports)) {
    out << row.policy << "," << row.macro_accuracy << "," << row.co2_g_per_request << ","
        << (row.dominated ? 1 : 0) << "\n";
  }
  return out.str();
}

std::string comparison_table_csv(
    const std::vector<std::pair<std::string, MetricsReport>>& reports) {
  std::ostringstream out;
  out << "policy,macro_accuracy,co2_g_per_request,mean_latency_ms,p95_latency_ms,"
         "latency_compliance,feasibility_coverage,fallback_rate\n";
  for (const auto& [name, r] : reports) {
    out << name << "," << r.macro_accuracy << "," << r.co2_g_per_request << ","
        << r.mean_latency_ms << "," << r.p95_latency_ms << "," << r.latency_compliance << ","
        << r.feasibility_coverage << "," << r.fallback_rate << "\n";
  }
  return out.str();
}

}  // namespace gar
