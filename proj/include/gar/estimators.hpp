#ifndef GAR_ESTIMATORS_HPP
#define GAR_ESTIMATORS_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gar/domain.hpp"
#include "gar/grid_carbon.hpp"

namespace gar {

/// Per-model correctness predictor: linear-in-features log-odds with
/// temperature scaling. Degenerate calibration data (single class or fewer
/// than two examples) falls back to a constant prior-rate predictor.
struct QualityModel {
  bool constant_model = false;
  double constant_p = 0.5;
  std::vector<double> weights;
  double bias = 0.0;
  double temperature = 1.0;

  static constexpr double kProbClamp = 1e-3;

  double predict(const std::vector<double>& features) const;
};

/// Per-model linear quantile model over (features, predicted tokens).
/// Intercept-only fits use the exact empirical quantile (lower-endpoint
/// rule); general fits minimize pinball loss by projected subgradient
/// descent initialized from the least-squares solution.
struct LatencyModel {
  std::vector<double> coeffs;  // one per feature, plus one for t_hat/1000 (last)
  double intercept = 0.0;
  double quantile = 0.95;
  double floor_ms = 1.0;

  double predict(const std::vector<double>& features, double t_hat_tokens) const;
};

/// Expected total tokens per (model, dataset): calibration-split mean with
/// a per-model fallback for unseen datasets.
struct TokenModel {
  std::map<std::string, double> per_dataset_mean;
  double default_mean = 0.0;

  double predict(const std::string& dataset_id) const;
};

struct FitConfig {
  double l2_regularization = 1e-4;
  double temperature_lo = 0.05;
  double temperature_hi = 20.0;
  bool shared_temperature = false;  // one temperature across models instead of per model
  double latency_quantile = 0.95;
  std::size_t min_latency_samples = 20;
};

/// Interface for pre-route prediction; implementations are immutable after
/// construction and safe to share.
class Estimators {
 public:
  virtual ~Estimators() = default;
  virtual PredictionBundle predict(const RequestInstance& request, const ModelPool& pool,
                                   const SLOConfig& slo, const GridIntensitySeries& grid) const = 0;
};

/// Estimators fitted on a calibration split.
class FittedEstimators : public Estimators {
 public:
  static FittedEstimators fit(const Trace& calibration, const ModelPool& pool,
                              const GridIntensitySeries& grid, const FitConfig& config = {});

  PredictionBundle predict(const RequestInstance& request, const ModelPool& pool,
                           const SLOConfig& slo, const GridIntensitySeries& grid) const override;

  std::string to_json_string() const;
  static FittedEstimators from_json_string(const std::string& text,
                                           const std::string& source_name = "<string>");
  void save(const std::string& path) const;
  static FittedEstimators load(const std::string& path);

  const QualityModel& quality(const std::string& model_id) const;
  const LatencyModel& latency(const std::string& model_id) const;
  const TokenModel& tokens(const std::string& model_id) const;

 private:
  std::map<std::string, QualityModel> quality_;
  std::map<std::string, LatencyModel> latency_;
  std::map<std::string, TokenModel> tokens_;
};

/// Passthrough estimators returning realized outcomes exactly; used by the
/// Oracle baseline and by tests.
class OracleEstimators : public Estimators {
 public:
  PredictionBundle predict(const RequestInstance& request, const ModelPool& pool,
                           const SLOConfig& slo, const GridIntensitySeries& grid) const override;
};

/// Fits one quality model from rows of (features, label).
QualityModel fit_quality_model(const std::vector<std::vector<double>>& features,
                               const std::vector<bool>& labels, const FitConfig& config);

/// Fits one latency model from rows of (features ++ t_hat/1000, latency).
/// Throws DataError naming the model when fewer than config.min_latency_samples
/// rows are available.
LatencyModel fit_latency_model(const std::vector<std::vector<double>>& rows,
                               const std::vector<double>& latencies_ms, double quantile,
                               std::size_t min_samples, const std::string& model_id);

/// Mean pinball loss of a constant prediction, used both by the fitter and
/// by test oracles.
double pinball_loss_constant(const std::vector<double>& sample, double prediction, double q);

/// Negative log-likelihood of temperature-scaled logits; minimized by
/// golden section over [config.temperature_lo, config.temperature_hi].
double temperature_nll(const std::vector<double>& logits, const std::vector<bool>& labels,
                       double temperature);
double fit_temperature(const std::vector<double>& logits, const std::vector<bool>& labels,
                       const FitConfig& config);

/// Carbon estimate in grams: (alpha + beta * t_hat/1000) Wh scaled to kWh,
/// times grid intensity in g/kWh.
double estimate_carbon_g(const ModelProfile& model, double t_hat_tokens, double arrival_time_s,
                         const GridIntensitySeries& grid);

/// Applies the safety-margin identity to a raw prediction.
void apply_margins(ModelPrediction& p, const SafetyMargins& margins);

}  // namespace gar

#endif  // GAR_ESTIMATORS_HPP
