#include "gar/policies.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

namespace gar {

std::string to_string(PolicyVariant v) {
  switch (v) {
    case PolicyVariant::largest: return "largest";
    case PolicyVariant::smallest: return "smallest";
    case PolicyVariant::accmax_unconstrained: return "accmax_unconstrained";
    case PolicyVariant::accmax_feasible: return "accmax_feasible";
    case PolicyVariant::oracle_feasible: return "oracle_feasible";
    case PolicyVariant::gar: return "gar";
    case PolicyVariant::gar_fixed: return "gar_fixed";
    case PolicyVariant::gar_eps: return "gar_eps";
    case PolicyVariant::gar_target: return "gar_target";
    case PolicyVariant::gar_pd: return "gar_pd";
  }
  return "gar";
}

PolicyVariant policy_variant_from_string(const std::string& s) {
  static const std::map<std::string, PolicyVariant> lookup = {
      {"largest", PolicyVariant::largest},
      {"smallest", PolicyVariant::smallest},
      {"accmax_unconstrained", PolicyVariant::accmax_unconstrained},
      {"accmax_feasible", PolicyVariant::accmax_feasible},
      {"oracle_feasible", PolicyVariant::oracle_feasible},
      {"gar", PolicyVariant::gar},
      {"gar_fixed", PolicyVariant::gar_fixed},
      {"gar_eps", PolicyVariant::gar_eps},
      {"gar_target", PolicyVariant::gar_target},
      {"gar_pd", PolicyVariant::gar_pd},
  };
  auto it = lookup.find(s);
  if (it == lookup.end()) {
    throw DataError("unknown policy variant: '" + s + "'");
  }
  return it->second;
}

namespace {

// tie chain (c_tilde, ell_tilde, -p_hat); pool order resolves exact ties
// because iteration is in pool order and updates require strict improvement
std::array<double, 3> carbon_tie_key(const PredictionBundle& bundle, int idx) {
  const auto& p = bundle.per_model[idx];
  return {p.c_tilde_g, p.ell_tilde_ms, -p.p_hat};
}

}  // namespace

int select_carbon_min(const std::vector<int>& candidates, const PredictionBundle& bundle) {
  if (candidates.empty()) {
    throw DataError("select_carbon_min: empty candidate set");
  }
  int best = candidates.front();
  auto best_key = carbon_tie_key(bundle, best);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const auto key = carbon_tie_key(bundle, candidates[i]);
    if (key < best_key) {
      best = candidates[i];
      best_key = key;
    }
  }
  return best;
}

int select_gar(const FeasibleSet& feasible, const PredictionBundle& bundle) {
  if (feasible.empty()) {
    throw DataError("select_gar: empty feasible set; caller must use fallback");
  }
  return select_carbon_min(feasible.model_indices, bundle);
}

CapSelection select_gar_fixed(const FeasibleSet& feasible, const PredictionBundle& bundle,
                              double carbon_cap_g) {
  if (feasible.empty()) {
    throw DataError("select_gar_fixed: empty feasible set; caller must use fallback");
  }
  std::vector<int> capped;
  for (int idx : feasible.model_indices) {
    if (bundle.per_model[idx].c_tilde_g <= carbon_cap_g) capped.push_back(idx);
  }
  if (!capped.empty()) {
    return {select_carbon_min(capped, bundle), false};
  }
  return {select_carbon_min(feasible.model_indices, bundle), true};
}

int select_gar_eps(const FeasibleSet& feasible, const PredictionBundle& bundle, double epsilon) {
  if (feasible.empty()) {
    throw DataError("select_gar_eps: empty feasible set; caller must use fallback");
  }
  double p_star = -1.0;
  for (int idx : feasible.model_indices) {
    p_star = std::max(p_star, bundle.per_model[idx].p_hat);
  }
  std::vector<int> near_best;
  for (int idx : feasible.model_indices) {
    if (bundle.per_model[idx].p_hat >= p_star - epsilon) near_best.push_back(idx);
  }
  return select_carbon_min(near_best, bundle);
}

int select_gar_target(const FeasibleSet& feasible, const PredictionBundle& bundle,
                      const std::map<std::string, double>& target_floors,
                      const std::string& dataset_id, double latency_target_ms) {
  if (feasible.empty()) {
    throw DataError("select_gar_target: empty feasible set; caller must use fallback");
  }
  auto it = target_floors.find(dataset_id);
  const double tau_tgt = it != target_floors.end() ? it->second : 0.0;
  std::vector<int> meeting;
  for (int idx : feasible.model_indices) {
    if (bundle.per_model[idx].p_hat >= tau_tgt) meeting.push_back(idx);
  }
  if (!meeting.empty()) {
    return select_carbon_min(meeting, bundle);
  }
  return fallback_select_with_reference(bundle, tau_tgt, latency_target_ms,
                                        feasible.model_indices);
}

double pd_score(const PredictionBundle& bundle, int model_index, const SLOConfig& slo,
                const PDConfig& pd, double lambda) {
  if (!(slo.latency_target_ms > 0.0)) {
    throw DataError("pd_score: latency target L must be > 0");
  }
  if (!(pd.budget_B_g > 0.0)) {
    throw DataError("pd_score: budget B must be > 0");
  }
  const auto& p = bundle.per_model[model_index];
  return pd.alpha_q * (1.0 - p.p_hat) + pd.alpha_ell * p.ell_tilde_ms / slo.latency_target_ms +
         lambda * p.c_tilde_g / pd.budget_B_g;
}

int select_pd(const FeasibleSet& feasible, const PredictionBundle& bundle, const SLOConfig& slo,
              const PDConfig& pd, double lambda) {
  if (feasible.empty()) {
    throw DataError("select_pd: empty feasible set; caller must use fallback");
  }
  int best = feasible.model_indices.front();
  auto key_of = [&](int idx) {
    const auto tie = carbon_tie_key(bundle, idx);
    return std::array<double, 4>{pd_score(bundle, idx, slo, pd, lambda), tie[0], tie[1], tie[2]};
  };
  auto best_key = key_of(best);
  for (std::size_t i = 1; i < feasible.model_indices.size(); ++i) {
    const int idx = feasible.model_indices[i];
    const auto key = key_of(idx);
    if (key < best_key) {
      best = idx;
      best_key = key;
    }
  }
  return best;
}

int select_baseline(PolicyVariant variant, const FeasibleSet& feasible,
                    const PredictionBundle& bundle, const ModelPool& pool,
                    const RequestInstance& request) {
  switch (variant) {
    case PolicyVariant::largest:
      return static_cast<int>(pool.largest_index());
    case PolicyVariant::smallest:
      return static_cast<int>(pool.smallest_index());
    case PolicyVariant::accmax_unconstrained: {
      int best = 0;
      for (std::size_t i = 1; i < bundle.per_model.size(); ++i) {
        if (bundle.per_model[i].p_hat > bundle.per_model[best].p_hat) best = static_cast<int>(i);
      }
      return best;
    }
    case PolicyVariant::accmax_feasible: {
      if (feasible.empty()) {
        throw DataError("accmax_feasible: empty feasible set; caller must use fallback");
      }
      int best = feasible.model_indices.front();
      for (std::size_t i = 1; i < feasible.model_indices.size(); ++i) {
        const int idx = feasible.model_indices[i];
        if (bundle.per_model[idx].p_hat > bundle.per_model[best].p_hat) best = idx;
      }
      return best;
    }
    case PolicyVariant::oracle_feasible: {
      if (feasible.empty()) {
        throw DataError("oracle_feasible: empty feasible set; caller must use fallback");
      }
      int best = -1;
      double best_carbon = 0.0;
      for (int idx : feasible.model_indices) {
        auto it = request.realized.find(pool.at(idx).model_id);
        if (it == request.realized.end()) {
          throw DataError("oracle_feasible: missing realized outcome for model '" +
                          pool.at(idx).model_id + "'");
        }
        if (best < 0 || it->second.carbon_g < best_carbon) {
          best = idx;
          best_carbon = it->second.carbon_g;
        }
      }
      return best;
    }
    default:
      throw DataError("select_baseline: '" + to_string(variant) + "' is not a baseline variant");
  }
}

TargetFloorResult tune_target_floors(const Trace& validation, const ModelPool& pool,
                                     const GridIntensitySeries& grid, const Estimators& estimators,
                                     const SLOConfig& slo, double desired_macro_accuracy) {
  if (validation.requests.empty()) {
    throw DataError("tune_target_floors: empty validation split");
  }

  struct Prepared {
    PredictionBundle bundle;
    FeasibleSet feasible;
    const RequestInstance* request;
  };
  std::map<std::string, std::vector<Prepared>> by_dataset;
  for (const auto& req : validation.requests) {
    Prepared p;
    p.bundle = estimators.predict(req, pool, slo, grid);
    p.feasible = feasible_set(p.bundle, slo, req.dataset_id);
    p.request = &req;
    by_dataset[req.dataset_id].push_back(std::move(p));
  }

  TargetFloorResult result;
  for (const auto& [dataset_id, rows] : by_dataset) {
    auto realized_accuracy = [&](double tau) {
      long correct = 0;
      for (const auto& row : rows) {
        int chosen;
        if (row.feasible.empty()) {
          chosen = fallback_select(row.bundle, slo, dataset_id);
        } else {
          std::map<std::string, double> floors{{dataset_id, tau}};
          chosen = select_gar_target(row.feasible, row.bundle, floors, dataset_id,
                                     slo.latency_target_ms);
        }
        if (row.request->realized.at(pool.at(chosen).model_id).correct) ++correct;
      }
      return static_cast<double>(correct) / static_cast<double>(rows.size());
    };

    // probe the endpoints plus the binary-search trajectory; realized
    // accuracy is a step function of tau, so the search drives a monotone
    // surrogate and the final answer is taken over the probed set
    std::map<double, double> probes;
    probes[0.0] = realized_accuracy(0.0);
    probes[1.0] = realized_accuracy(1.0);
    double lo = 0.0, hi = 1.0;
    for (int iter = 0; iter < 24; ++iter) {
      const double mid = 0.5 * (lo + hi);
      const double acc = realized_accuracy(mid);
      probes[mid] = acc;
      if (acc >= desired_macro_accuracy) {
        hi = mid;
      } else {
        lo = mid;
      }
    }

    double chosen_floor = -1.0;
    double best_acc = -1.0;
    double best_floor = 0.0;
    for (const auto& [tau, acc] : probes) {
      if (acc >= desired_macro_accuracy && chosen_floor < 0.0) {
        chosen_floor = tau;  // smallest achieving floor (map is tau-ordered)
      }
      if (acc > best_acc) {
        best_acc = acc;
        best_floor = tau;
      }
    }
    if (chosen_floor >= 0.0) {
      result.floors[dataset_id] = chosen_floor;
      result.achieved_accuracy[dataset_id] = probes[chosen_floor];
    } else {
      result.floors[dataset_id] = best_floor;
      result.achieved_accuracy[dataset_id] = best_acc;
      result.shortfall[dataset_id] = desired_macro_accuracy - best_acc;
    }
  }
  return result;
}

}  // namespace gar
