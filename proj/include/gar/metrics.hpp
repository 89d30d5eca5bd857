#ifndef GAR_METRICS_HPP
#define GAR_METRICS_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gar/domain.hpp"

namespace gar {

struct MetricsReport {
  double macro_accuracy = 0.0;     // unweighted mean of per-dataset accuracies
  double co2_g_per_request = 0.0;  // mean realized carbon of chosen models
  double mean_latency_ms = 0.0;
  double p95_latency_ms = 0.0;       // nearest-rank
  double latency_compliance = 0.0;   // fraction with realized latency <= L
  double feasibility_coverage = 0.0; // fraction with nonempty feasible set
  double fallback_rate = 0.0;
  std::optional<double> oracle_carbon_ratio;  // policy CO2 / oracle CO2
  std::map<std::string, double> per_dataset_accuracy;
  long n_requests = 0;

  std::string to_json_string() const;
};

/// Aggregates a decision log against its trace. Throws DataError on empty
/// or misaligned inputs.
MetricsReport summarize(const std::vector<RoutingDecision>& decisions, const SLOConfig& slo,
                        const Trace& trace,
                        std::optional<double> oracle_co2_g_per_request = std::nullopt);

struct ParetoRow {
  std::string policy;
  double macro_accuracy = 0.0;
  double co2_g_per_request = 0.0;
  bool dominated = false;
};

/// Dominance in (accuracy up, CO2 down) space; ties are nondominated.
std::vector<ParetoRow> pareto_flags(const std::vector<std::pair<std::string, MetricsReport>>& reports);

std::string pareto_csv(const std::vector<std::pair<std::string, MetricsReport>>& reports);

/// Comparison table, one row per policy: accuracy, CO2, latency columns
/// plus feasibility coverage and fallback rate.
std::string comparison_table_csv(const std::vector<std::pair<std::string, MetricsReport>>& reports);

}  // namespace gar

#endif  // GAR_METRICS_HPP
