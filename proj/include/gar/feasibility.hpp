#ifndef GAR_FEASIBILITY_HPP
#define GAR_FEASIBILITY_HPP

#include <string>
#include <vector>

#include "gar/domain.hpp"

namespace gar {

struct ConstraintViolation {
  double accuracy_deficit = 0.0;  // max(0, tau - p_hat)
  double latency_excess = 0.0;    // max(0, ell_tilde - L)
};

/// Models passing both the accuracy floor and the margin-inflated latency
/// target, in pool order. Per-model violations are always recorded so the
/// fallback rule can reuse them.
struct FeasibleSet {
  std::vector<int> model_indices;               // pool order preserved
  std::vector<ConstraintViolation> violations;  // one per pool model

  bool empty() const { return model_indices.empty(); }
  bool contains(int idx) const;
};

/// Builds the feasible set with boundary-inclusive comparisons
/// (p_hat >= tau, ell_tilde <= L). Throws DataError when no floor is
/// configured for the dataset.
FeasibleSet feasible_set(const PredictionBundle& bundle, const SLOConfig& slo,
                         const std::string& dataset_id);

/// Full pool presented as a feasible set (violations still computed);
/// used when feasibility gates are ablated.
FeasibleSet full_pool_set(const PredictionBundle& bundle, const SLOConfig& slo,
                          const std::string& dataset_id);

/// Minimum-violation choice for an empty feasible set: lexicographic
/// (accuracy_deficit, latency_excess, pool index).
int fallback_select(const PredictionBundle& bundle, const SLOConfig& slo,
                    const std::string& dataset_id);

/// Same rule with an explicit accuracy reference, restricted to the given
/// candidates (used by GAR-Target when its floor empties the restriction).
int fallback_select_with_reference(const PredictionBundle& bundle, double tau_ref,
                                   double latency_target_ms, const std::vector<int>& candidates);

}  // namespace gar

#endif  // GAR_FEASIBILITY_HPP
