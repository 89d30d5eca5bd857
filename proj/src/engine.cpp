#include "gar/engine.hpp"

#include <cmath>

namespace gar {

PredictionBundle apply_ablation(PredictionBundle bundle, const AblationFlags& flags,
                                const SafetyMargins& margins) {
  if (!flags.disable_carbon_estimator && !flags.disable_accuracy_estimator &&
      !flags.disable_latency_estimator) {
    return bundle;
  }
  for (auto& p : bundle.per_model) {
    if (flags.disable_carbon_estimator) p.c_hat_g = 1.0;
    if (flags.disable_accuracy_estimator) p.p_hat = 1.0;
    if (flags.disable_latency_estimator) p.ell_p95_hat_ms = 0.0;
    apply_margins(p, margins);
  }
  return bundle;
}

double compute_baseline_mean_carbon(const Trace& trace, const ModelPool& pool,
                                    PolicyVariant reference) {
  if (trace.requests.empty()) {
    throw DataError("compute_baseline_mean_carbon: empty trace");
  }
  std::size_t idx;
  switch (reference) {
    case PolicyVariant::largest: idx = pool.largest_index(); break;
    case PolicyVariant::smallest: idx = pool.smallest_index(); break;
    default:
      throw DataError("compute_baseline_mean_carbon: reference must be largest or smallest");
  }
  const std::string& mid = pool.at(idx).model_id;
  double total = 0.0;
  for (const auto& req : trace.requests) {
    auto it = req.realized.find(mid);
    if (it == req.realized.end()) {
      throw DataError("trace missing realized outcome for model '" + mid + "' at request " +
                      std::to_string(req.request_index));
    }
    total += it->second.carbon_g;
  }
  return total / static_cast<double>(trace.requests.size());
}

RunResult run(const Trace& trace, const ModelPool& pool, const GridIntensitySeries& grid,
              const Estimators& estimators, const RunConfig& config) {
  pool.validate();
  const PolicyVariant variant = config.policy.variant;
  const bool is_pd = variant == PolicyVariant::gar_pd;
  const bool ignores_feasibility = variant == PolicyVariant::largest ||
                                   variant == PolicyVariant::smallest ||
                                   variant == PolicyVariant::accmax_unconstrained;

  PDConfig pd = config.policy.pd;
  if (is_pd && !(pd.budget_B_g > 0.0)) {
    pd.budget_B_g =
        config.budget_fraction * compute_baseline_mean_carbon(trace, pool, PolicyVariant::largest);
  }
  CarbonLedger ledger(pd.window_W, is_pd ? pd.budget_B_g : 1.0);
  DualState dual{0.0, pd.eta};

  RunResult result;
  result.decisions.reserve(trace.requests.size());

  for (const auto& req : trace.requests) {
    PredictionBundle bundle;
    FeasibleSet fs;
    try {
      bundle = estimators.predict(req, pool, config.slo, grid);
      bundle = apply_ablation(std::move(bundle), config.ablations, config.slo.margins);
      fs = config.ablations.disable_feasibility_gates
               ? full_pool_set(bundle, config.slo, req.dataset_id)
               : feasible_set(bundle, config.slo, req.dataset_id);
    } catch (const DataError& e) {
      throw DataError("request " + std::to_string(req.request_index) + ": " + e.what());
    }

    RoutingDecision d;
    d.request_index = req.request_index;
    d.lambda_snapshot = is_pd ? dual.lambda : 0.0;
    for (int idx : fs.model_indices) d.feasible_model_ids.push_back(pool.at(idx).model_id);

    int chosen;
    if (ignores_feasibility) {
      chosen = select_baseline(variant, fs, bundle, pool, req);
    } else if (fs.empty()) {
      chosen = fallback_select(bundle, config.slo, req.dataset_id);
      d.used_fallback = true;
      d.fallback_reason = FallbackReason::empty_feasible;
    } else {
      switch (variant) {
        case PolicyVariant::gar:
          chosen = select_gar(fs, bundle);
          break;
        case PolicyVariant::gar_fixed: {
          const CapSelection sel = select_gar_fixed(fs, bundle, config.policy.carbon_cap_g);
          chosen = sel.model_index;
          if (sel.used_cap_fallback) {
            d.used_fallback = true;
            d.fallback_reason = FallbackReason::empty_after_cap;
          }
          break;
        }
        case PolicyVariant::gar_eps:
          chosen = select_gar_eps(fs, bundle, config.policy.epsilon);
          break;
        case PolicyVariant::gar_target:
          chosen = select_gar_target(fs, bundle, config.policy.target_floors, req.dataset_id,
                                     config.slo.latency_target_ms);
          break;
        case PolicyVariant::gar_pd:
          chosen = select_pd(fs, bundle, config.slo, pd, dual.lambda);
          break;
        default:
          chosen = select_baseline(variant, fs, bundle, pool, req);
          break;
      }
    }

    const std::string& chosen_id = pool.at(chosen).model_id;
    auto rit = req.realized.find(chosen_id);
    if (rit == req.realized.end()) {
      throw DataError("request " + std::to_string(req.request_index) +
                      ": missing realized outcome for chosen model '" + chosen_id + "'");
    }

    d.chosen_model_id = chosen_id;
    d.predicted_p_hat = bundle.per_model[chosen].p_hat;
    d.predicted_ell_tilde_ms = bundle.per_model[chosen].ell_tilde_ms;
    d.predicted_c_tilde_g = bundle.per_model[chosen].c_tilde_g;
    d.realized = rit->second;
    if (config.record_scores) {
      for (std::size_t i = 0; i < pool.size(); ++i) {
        d.score_per_model[pool.at(i).model_id] =
            is_pd ? pd_score(bundle, static_cast<int>(i), config.slo, pd, dual.lambda)
                  : bundle.per_model[i].c_tilde_g;
      }
    }
    result.decisions.push_back(std::move(d));

    // fallback-selected requests are ledgered too; the budget tracks what
    // was actually emitted
    ledger.push(rit->second.carbon_g);
    if (is_pd) {
      dual_update(dual, ledger, config.strict_bw);
    }
  }

  result.final_lambda = dual.lambda;
  result.final_ledger_state = ledger.dump_state();
  return result;
}

}  // namespace gar
