#include "gar/feasibility.hpp"

#include <algorithm>

namespace gar {

bool FeasibleSet::contains(int idx) const {
  return std::find(model_indices.begin(), model_indices.end(), idx) != model_indices.end();
}

namespace {

std::vector<ConstraintViolation> compute_violations(const PredictionBundle& bundle, double tau,
                                                    double latency_target_ms) {
  std::vector<ConstraintViolation> out;
  out.reserve(bundle.per_model.size());
  for (const auto& p : bundle.per_model) {
    ConstraintViolation v;
    v.accuracy_deficit = std::max(0.0, tau - p.p_hat);
    v.latency_excess = std::max(0.0, p.ell_tilde_ms - latency_target_ms);
    out.push_back(v);
  }
  return out;
}

}  // namespace

FeasibleSet feasible_set(const PredictionBundle& bundle, const SLOConfig& slo,
                         const std::string& dataset_id) {
  const double tau = slo.floor_for(dataset_id);
  FeasibleSet fs;
  fs.violations = compute_violations(bundle, tau, slo.latency_target_ms);
  for (std::size_t i = 0; i < bundle.per_model.size(); ++i) {
    const auto& p = bundle.per_model[i];
    if (p.p_hat >= tau && p.ell_tilde_ms <= slo.latency_target_ms) {
      fs.model_indices.push_back(static_cast<int>(i));
    }
  }
  return fs;
}

FeasibleSet full_pool_set(const PredictionBundle& bundle, const SLOConfig& slo,
                          const std::string& dataset_id) {
  const double tau = slo.floor_for(dataset_id);
  FeasibleSet fs;
  fs.violations = compute_violations(bundle, tau, slo.latency_target_ms);
  for (std::size_t i = 0; i < bundle.per_model.size(); ++i) {
    fs.model_indices.push_back(static_cast<int>(i));
  }
  return fs;
}

int fallback_select(const PredictionBundle& bundle, const SLOConfig& slo,
                    const std::string& dataset_id) {
  std::vector<int> all(bundle.per_model.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return fallback_select_with_reference(bundle, slo.floor_for(dataset_id), slo.latency_target_ms,
                                        all);
}

int fallback_select_with_reference(const PredictionBundle& bundle, double tau_ref,
                                   double latency_target_ms, const std::vector<int>& candidates) {
  if (candidates.empty()) {
    throw DataError("fallback_select: empty candidate set");
  }
  int best = candidates.front();
  auto key = [&](int idx) {
    const auto& p = bundle.per_model[idx];
    return std::pair<double, double>{std::max(0.0, tau_ref - p.p_hat),
                                     std::max(0.0, p.ell_tilde_ms - latency_target_ms)};
  };
  auto best_key = key(best);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const auto k = key(candidates[i]);
    if (k < best_key) {  // pool-order final tiebreak: strict improvement only
      best = candidates[i];
      best_key = k;
    }
  }
  return best;
}

}  // namespace gar
