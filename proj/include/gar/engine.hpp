#ifndef GAR_ENGINE_HPP
#define GAR_ENGINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gar/budget.hpp"
#include "gar/domain.hpp"
#include "gar/estimators.hpp"
#include "gar/grid_carbon.hpp"
#include "gar/policies.hpp"

namespace gar {

/// Ablation switches; independent and composable.
struct AblationFlags {
  bool disable_feasibility_gates = false;
  bool disable_carbon_estimator = false;
  bool disable_accuracy_estimator = false;
  bool disable_latency_estimator = false;
};

struct RunConfig {
  PolicyConfig policy;
  SLOConfig slo;
  AblationFlags ablations;
  std::uint64_t seed = 0;
  double budget_fraction = 0.65;  // B = fraction * baseline mean carbon when B unset
  bool strict_bw = false;         // literal B*W in the dual update even for t < W
  bool record_scores = false;     // per-model audit scores on every decision
};

struct RunResult {
  std::vector<RoutingDecision> decisions;
  double final_lambda = 0.0;
  std::string final_ledger_state;  // JSON dump
};

/// Neutralizes ablated signals while keeping every code path live:
/// carbon -> constant 1.0, accuracy -> 1.0 (gates pass), latency -> 0
/// (signal and gate gone). Margin identities are re-applied afterwards so
/// bundle invariants keep holding.
PredictionBundle apply_ablation(PredictionBundle bundle, const AblationFlags& flags,
                                const SafetyMargins& margins);

/// Mean realized carbon per request of a rule-based reference policy
/// (default: Largest). Used to resolve B = fraction * baseline mean.
double compute_baseline_mean_carbon(const Trace& trace, const ModelPool& pool,
                                    PolicyVariant reference = PolicyVariant::largest);

/// Trace replay: predict -> gates -> select (with fallback) -> observe ->
/// ledger push -> dual update (PD only). Strictly sequential; decisions
/// carry the lambda snapshot used for selection.
RunResult run(const Trace& trace, const ModelPool& pool, const GridIntensitySeries& grid,
              const Estimators& estimators, const RunConfig& config);

}  // namespace gar

#endif  // GAR_ENGINE_HPP
