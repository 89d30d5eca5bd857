#ifndef GAR_POLICIES_HPP
#define GAR_POLICIES_HPP

#include <map>
#include <string>
#include <vector>

#include "gar/domain.hpp"
#include "gar/estimators.hpp"
#include "gar/feasibility.hpp"

namespace gar {

enum class PolicyVariant {
  largest,
  smallest,
  accmax_unconstrained,
  accmax_feasible,
  oracle_feasible,
  gar,
  gar_fixed,
  gar_eps,
  gar_target,
  gar_pd,
};

std::string to_string(PolicyVariant v);
PolicyVariant policy_variant_from_string(const std::string& s);

struct PDConfig {
  double alpha_q = 1.0;
  double alpha_ell = 1.0;
  double eta = 0.05;
  double budget_B_g = 0.0;  // resolved before a PD run
  std::size_t window_W = 100;
};

struct PolicyConfig {
  PolicyVariant variant = PolicyVariant::gar;
  double carbon_cap_g = 0.0;                    // gar_fixed
  double epsilon = 0.0;                         // gar_eps, probability points
  std::map<std::string, double> target_floors;  // gar_target
  PDConfig pd;                                  // gar_pd
};

// All selections share one deterministic tie chain: carbon-minimizing
// choices break ties by (c_tilde, ell_tilde, -p_hat, pool index), and
// score/accuracy argmins append the same chain after their primary key.

/// Lowest predicted-carbon model in the feasible set (Eq. 5 selection).
/// Precondition: feasible nonempty.
int select_gar(const FeasibleSet& feasible, const PredictionBundle& bundle);

/// Carbon-min restricted to candidate pool indices; shared by all variants.
int select_carbon_min(const std::vector<int>& candidates, const PredictionBundle& bundle);

/// Hard per-request carbon cap; when the cap empties the set, falls back to
/// the lowest-carbon model without the cap and reports it.
struct CapSelection {
  int model_index;
  bool used_cap_fallback;
};
CapSelection select_gar_fixed(const FeasibleSet& feasible, const PredictionBundle& bundle,
                              double carbon_cap_g);

/// Carbon-min among models within epsilon of the best feasible p_hat.
int select_gar_eps(const FeasibleSet& feasible, const PredictionBundle& bundle, double epsilon);

/// Carbon-min among feasible models meeting the per-dataset target floor;
/// when the target empties the restriction, the minimum-violation rule runs
/// over the feasible set with the target floor as the accuracy reference.
int select_gar_target(const FeasibleSet& feasible, const PredictionBundle& bundle,
                      const std::map<std::string, double>& target_floors,
                      const std::string& dataset_id, double latency_target_ms);

/// Penalized PD objective: alpha_q(1-p_hat) + alpha_ell*ell_tilde/L +
/// lambda*c_tilde/B.
double pd_score(const PredictionBundle& bundle, int model_index, const SLOConfig& slo,
                const PDConfig& pd, double lambda);

/// Argmin of pd_score over the feasible set.
int select_pd(const FeasibleSet& feasible, const PredictionBundle& bundle, const SLOConfig& slo,
              const PDConfig& pd, double lambda);

/// Non-GAR reference policies. largest/smallest/accmax_unconstrained ignore
/// the feasible set; accmax_feasible and oracle_feasible require it
/// nonempty. oracle_feasible reads realized outcomes from the request.
int select_baseline(PolicyVariant variant, const FeasibleSet& feasible,
                    const PredictionBundle& bundle, const ModelPool& pool,
                    const RequestInstance& request);

struct TargetFloorResult {
  std::map<std::string, double> floors;
  std::map<std::string, double> achieved_accuracy;
  std::map<std::string, double> shortfall;  // only datasets that missed the target
};

/// Per-dataset floor tuning on a validation split: binary search over
/// tau in [0,1] (24 iterations) on the realized accuracy of GAR-Target
/// routing, returning the smallest probed floor achieving the desired
/// accuracy, or the accuracy-maximizing probe with its shortfall.
TargetFloorResult tune_target_floors(const Trace& validation, const ModelPool& pool,
                                     const GridIntensitySeries& grid, const Estimators& estimators,
                                     const SLOConfig& slo, double desired_macro_accuracy);

}  // namespace gar

#endif  // GAR_POLICIES_HPP
