#ifndef GAR_DOMAIN_HPP
#define GAR_DOMAIN_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gar/common.hpp"

namespace gar {

/// One member of the routing pool. Energy follows the affine model
/// energy_wh = alpha + beta * tokens / 1000.
struct ModelProfile {
  std::string model_id;
  std::string size_label;  // informational, e.g. "7B"; parsed for Largest/Smallest
  std::string region;
  double energy_base_alpha_wh = 0.0;
  double energy_per_token_beta_wh_per_1k = 0.0;
  double nominal_latency_ms = 0.0;  // reference latency used by the synthetic generator
};

/// Ordered model pool. Pool order is fixed and serves as the deterministic
/// final tie-break everywhere.
struct ModelPool {
  std::vector<ModelProfile> models;

  std::size_t size() const { return models.size(); }
  const ModelProfile& at(std::size_t i) const { return models[i]; }

  /// Index of a model_id, or -1 if absent.
  int index_of(const std::string& model_id) const;

  /// Throws DataError on empty pool, duplicate ids, or invalid energy
  /// coefficients.
  void validate() const;

  /// Parses size_label into an approximate parameter count ("7B" -> 7e9).
  /// Throws DataError on unparseable labels.
  static double parse_param_count(const std::string& size_label);

  /// Pool index of the model with the largest (or smallest) parameter count,
  /// ties broken by pool order.
  std::size_t largest_index() const;
  std::size_t smallest_index() const;
};

struct RealizedOutcome {
  bool correct = false;
  double latency_ms = 0.0;
  double carbon_g = 0.0;
  long output_tokens = 0;
};

/// One trace request with counterfactual realized outcomes for every model
/// in the pool.
struct RequestInstance {
  long request_index = 0;
  std::string dataset_id;
  double arrival_time_s = 0.0;
  std::vector<double> features;
  std::map<std::string, RealizedOutcome> realized;
};

struct TraceHeader {
  std::vector<std::string> model_ids;
  double epoch_s = 0.0;
};

struct Trace {
  TraceHeader header;
  std::vector<RequestInstance> requests;

  std::size_t size() const { return requests.size(); }
};

struct SafetyMargins {
  double gamma_c = 0.1;
  double gamma_ell = 0.05;
};

/// Service-level objectives: per-dataset accuracy floors and a p95 latency
/// target shared across datasets.
struct SLOConfig {
  std::map<std::string, double> accuracy_floor;
  std::optional<double> default_floor;
  double latency_target_ms = 3000.0;
  SafetyMargins margins;

  /// Floor for a dataset; falls back to default_floor, throws DataError
  /// when neither exists.
  double floor_for(const std::string& dataset_id) const;
};

/// Per-model pre-route estimates (one slot per pool model, pool order).
struct ModelPrediction {
  double p_hat = 0.0;          // predicted correctness probability
  double ell_p95_hat_ms = 0.0; // predicted p95 latency
  double c_hat_g = 0.0;        // predicted emissions (grams)
  double t_hat_tokens = 0.0;   // predicted total tokens
  double c_tilde_g = 0.0;      // (1+gamma_c) * c_hat_g
  double ell_tilde_ms = 0.0;   // (1+gamma_ell) * ell_p95_hat_ms
};

struct PredictionBundle {
  std::vector<ModelPrediction> per_model;  // aligned with pool order
};

enum class FallbackReason { none, empty_feasible, empty_after_cap };

std::string to_string(FallbackReason r);
FallbackReason fallback_reason_from_string(const std::string& s);

/// Audit-trail unit: everything needed to reconstruct and verify one
/// routing decision.
struct RoutingDecision {
  long request_index = 0;
  std::string chosen_model_id;
  std::vector<std::string> feasible_model_ids;
  bool used_fallback = false;
  FallbackReason fallback_reason = FallbackReason::none;
  double lambda_snapshot = 0.0;  // lambda used for selection (PD only, else 0)
  double predicted_p_hat = 0.0;
  double predicted_ell_tilde_ms = 0.0;
  double predicted_c_tilde_g = 0.0;
  RealizedOutcome realized;
  std::map<std::string, double> score_per_model;  // optional audit detail
};

struct TraceViolation {
  long request_index = -1;
  std::string model_id;  // empty when not model-specific
  std::string message;
};

/// Structural validation of a trace against a pool: missing realized
/// entries, nonpositive latencies, negative carbon, arrival-time
/// regressions, bad request indexing. Empty result means well-formed.
std::vector<TraceViolation> validate_trace(const Trace& trace, const ModelPool& pool);

}  // namespace gar

#endif  // GAR_DOMAIN_HPP
