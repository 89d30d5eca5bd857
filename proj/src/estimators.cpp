#include "gar/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gar {

using nlohmann::json;

double QualityModel::predict(const std::vector<double>& features) const {
  if (constant_model) {
    return clamp(constant_p, kProbClamp, 1.0 - kProbClamp);
  }
  double z = bias;
  const std::size_t d = std::min(features.size(), weights.size());
  for (std::size_t i = 0; i < d; ++i) z += weights[i] * features[i];
  return clamp(sigmoid(z / temperature), kProbClamp, 1.0 - kProbClamp);
}

double LatencyModel::predict(const std::vector<double>& features, double t_hat_tokens) const {
  double y = intercept;
  if (!coeffs.empty()) {
    const std::size_t d = coeffs.size() - 1;
    for (std::size_t i = 0; i < d && i < features.size(); ++i) y += coeffs[i] * features[i];
    y += coeffs.back() * (t_hat_tokens / 1000.0);
  }
  return std::max(y, floor_ms);
}

double TokenModel::predict(const std::string& dataset_id) const {
  auto it = per_dataset_mean.find(dataset_id);
  const double t = it != per_dataset_mean.end() ? it->second : default_mean;
  return std::max(t, 0.0);
}

double temperature_nll(const std::vector<double>& logits, const std::vector<bool>& labels,
                       double temperature) {
  double nll = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double p = clamp(sigmoid(logits[i] / temperature), QualityModel::kProbClamp,
                           1.0 - QualityModel::kProbClamp);
    nll -= labels[i] ? std::log(p) : std::log(1.0 - p);
  }
  return nll;
}

double fit_temperature(const std::vector<double>& logits, const std::vector<bool>& labels,
                       const FitConfig& config) {
  return golden_section_minimize(
      [&](double t) { return temperature_nll(logits, labels, t); }, config.temperature_lo,
      config.temperature_hi);
}

QualityModel fit_quality_model(const std::vector<std::vector<double>>& features,
                               const std::vector<bool>& labels, const FitConfig& config) {
  if (features.empty() || features.size() != labels.size()) {
    throw DataError("fit_quality_model: empty or mismatched calibration data");
  }
  const std::size_t n = features.size();
  std::size_t positives = 0;
  for (bool y : labels) positives += y ? 1 : 0;

  QualityModel model;
  if (n < 2 || positives == 0 || positives == n) {
    model.constant_model = true;
    model.constant_p =
        clamp(static_cast<double>(positives) / static_cast<double>(n), QualityModel::kProbClamp,
              1.0 - QualityModel::kProbClamp);
    return model;
  }

  const std::size_t d = features[0].size();
  const std::size_t dim = d + 1;  // bias last
  std::vector<double> w(dim, 0.0);
  const double reg = config.l2_regularization;

  auto logit_of = [&](const std::vector<double>& x) {
    double z = w[d];
    for (std::size_t j = 0; j < d; ++j) z += w[j] * x[j];
    return z;
  };
  auto objective = [&]() {
    double nll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = logit_of(features[i]);
      // log(1+exp(-|z|)) form keeps this finite for large |z|
      nll += std::log1p(std::exp(-std::fabs(z))) + (labels[i] ? std::max(-z, 0.0) : std::max(z, 0.0));
    }
    double penalty = 0.0;
    for (std::size_t j = 0; j < d; ++j) penalty += w[j] * w[j];
    return nll + 0.5 * reg * penalty;
  };

  // Newton / IRLS with step damping
  double obj = objective();
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<double> grad(dim, 0.0);
    std::vector<double> hess(dim * dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double z = logit_of(features[i]);
      const double p = sigmoid(z);
      const double r = p - (labels[i] ? 1.0 : 0.0);
      const double wgt = std::max(p * (1.0 - p), 1e-8);
      for (std::size_t j = 0; j < dim; ++j) {
        const double xj = j < d ? features[i][j] : 1.0;
        grad[j] += r * xj;
        for (std::size_t k = 0; k < dim; ++k) {
          const double xk = k < d ? features[i][k] : 1.0;
          hess[j * dim + k] += wgt * xj * xk;
        }
      }
    }
    for (std::size_t j = 0; j < d; ++j) {
      grad[j] += reg * w[j];
      hess[j * dim + j] += reg;
    }
    for (std::size_t j = 0; j < dim; ++j) hess[j * dim + j] += 1e-10;

    std::vector<double> step = solve_linear(hess, grad);
    double step_norm = 0.0;
    for (double s : step) step_norm += s * s;

    double scale = 1.0;
    std::vector<double> w_prev = w;
    double new_obj = obj;
    for (int halvings = 0; halvings < 30; ++halvings) {
      for (std::size_t j = 0; j < dim; ++j) w[j] = w_prev[j] - scale * step[j];
      new_obj = objective();
      if (new_obj <= obj + 1e-12) break;
      scale *= 0.5;
    }
    if (new_obj > obj) {
      w = w_prev;
      break;
    }
    obj = new_obj;
    if (scale * scale * step_norm < 1e-16) break;
  }

  model.weights.assign(w.begin(), w.begin() + d);
  model.bias = w[d];

  std::vector<double> logits(n);
  for (std::size_t i = 0; i < n; ++i) logits[i] = logit_of(features[i]);
  model.temperature = fit_temperature(logits, labels, config);
  return model;
}

double pinball_loss_constant(const std::vector<double>& sample, double prediction, double q) {
  double loss = 0.0;
  for (double y : sample) {
    const double u = y - prediction;
    loss += u >= 0.0 ? q * u : (q - 1.0) * u;
  }
  return loss / static_cast<double>(sample.size());
}

namespace {

double pinball_loss_rows(const std::vector<std::vector<double>>& rows,
                         const std::vector<double>& y, const std::vector<double>& coeffs,
                         double intercept, double q) {
  double loss = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double pred = intercept;
    for (std::size_t j = 0; j < coeffs.size(); ++j) pred += coeffs[j] * rows[i][j];
    const double u = y[i] - pred;
    loss += u >= 0.0 ? q * u : (q - 1.0) * u;
  }
  return loss / static_cast<double>(rows.size());
}

}  // namespace

LatencyModel fit_latency_model(const std::vector<std::vector<double>>& rows,
                               const std::vector<double>& latencies_ms, double quantile,
                               std::size_t min_samples, const std::string& model_id) {
  if (rows.size() != latencies_ms.size() || rows.size() < min_samples) {
    throw DataError("fit_latency_model: too few calibration samples for model '" + model_id +
                    "' (" + std::to_string(rows.size()) + " < " + std::to_string(min_samples) + ")");
  }
  const std::size_t n = rows.size();
  const std::size_t d = rows.empty() ? 0 : rows[0].size();

  LatencyModel model;
  model.quantile = quantile;

  // columns with no variation carry no signal; an all-constant design
  // collapses to the exact empirical quantile
  bool any_varying = false;
  for (std::size_t j = 0; j < d && !any_varying; ++j) {
    for (std::size_t i = 1; i < n; ++i) {
      if (rows[i][j] != rows[0][j]) {
        any_varying = true;
        break;
      }
    }
  }
  if (!any_varying) {
    model.intercept = nearest_rank_quantile(latencies_ms, quantile);
    return model;
  }

  // least-squares warm start (ridge-stabilized normal equations)
  const std::size_t dim = d + 1;
  std::vector<double> xtx(dim * dim, 0.0), xty(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double xj = j < d ? rows[i][j] : 1.0;
      xty[j] += xj * latencies_ms[i];
      for (std::size_t k = 0; k < dim; ++k) {
        const double xk = k < d ? rows[i][k] : 1.0;
        xtx[j * dim + k] += xj * xk;
      }
    }
  }
  for (std::size_t j = 0; j < dim; ++j) xtx[j * dim + j] += 1e-8;
  std::vector<double> theta = solve_linear(xtx, xty);

  std::vector<double> coeffs(theta.begin(), theta.begin() + d);
  double intercept = theta[d];

  // subgradient descent on the pinball loss, keeping the best iterate
  double col_scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) col_scale = std::max(col_scale, std::fabs(rows[i][j]));
  }
  col_scale = std::max(col_scale, 1.0);
  double y_scale = 1.0;
  for (double v : latencies_ms) y_scale = std::max(y_scale, std::fabs(v));
  const double step0 = 0.5 * y_scale / col_scale;

  std::vector<double> best_coeffs = coeffs;
  double best_intercept = intercept;
  double best_loss = pinball_loss_rows(rows, latencies_ms, coeffs, intercept, quantile);

  for (int iter = 1; iter <= 3000; ++iter) {
    std::vector<double> g(d, 0.0);
    double g0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double pred = intercept;
      for (std::size_t j = 0; j < d; ++j) pred += coeffs[j] * rows[i][j];
      const double slope = latencies_ms[i] > pred ? -quantile : (1.0 - quantile);
      for (std::size_t j = 0; j < d; ++j) g[j] += slope * rows[i][j];
      g0 += slope;
    }
    const double step = step0 / (static_cast<double>(n) * std::sqrt(static_cast<double>(iter)));
    for (std::size_t j = 0; j < d; ++j) coeffs[j] -= step * g[j];
    intercept -= step * g0;
    const double loss = pinball_loss_rows(rows, latencies_ms, coeffs, intercept, quantile);
    if (loss < best_loss) {
      best_loss = loss;
      best_coeffs = coeffs;
      best_intercept = intercept;
    }
  }

  model.coeffs = std::move(best_coeffs);
  model.intercept = best_intercept;
  return model;
}

double estimate_carbon_g(const ModelProfile& model, double t_hat_tokens, double arrival_time_s,
                         const GridIntensitySeries& grid) {
  const double energy_wh =
      model.energy_base_alpha_wh + model.energy_per_token_beta_wh_per_1k * t_hat_tokens / 1000.0;
  const double intensity = grid.intensity_at(arrival_time_s, model.region);
  return std::max(energy_wh / 1000.0 * intensity, 0.0);
}

void apply_margins(ModelPrediction& p, const SafetyMargins& margins) {
  p.c_tilde_g = (1.0 + margins.gamma_c) * p.c_hat_g;
  p.ell_tilde_ms = (1.0 + margins.gamma_ell) * p.ell_p95_hat_ms;
}

FittedEstimators FittedEstimators::fit(const Trace& calibration, const ModelPool& pool,
                                       const GridIntensitySeries& grid, const FitConfig& config) {
  if (calibration.requests.empty()) {
    throw DataError("empty calibration split");
  }
  FittedEstimators est;

  for (const auto& m : pool.models) {
    // token model first: its predictions feed the latency design matrix
    TokenModel tok;
    std::map<std::string, std::pair<double, long>> sums;
    double total = 0.0;
    long count = 0;
    for (const auto& req : calibration.requests) {
      auto it = req.realized.find(m.model_id);
      if (it == req.realized.end()) {
        throw DataError("calibration trace missing realized outcome for model '" + m.model_id +
                        "' at request " + std::to_string(req.request_index));
      }
      auto& acc = sums[req.dataset_id];
      acc.first += static_cast<double>(it->second.output_tokens);
      acc.second += 1;
      total += static_cast<double>(it->second.output_tokens);
      ++count;
    }
    for (const auto& [ds, acc] : sums) {
      tok.per_dataset_mean[ds] = acc.first / static_cast<double>(acc.second);
    }
    tok.default_mean = total / static_cast<double>(count);

    std::vector<std::vector<double>> qx;
    std::vector<bool> qy;
    std::vector<std::vector<double>> lx;
    std::vector<double> ly;
    for (const auto& req : calibration.requests) {
      const auto& outcome = req.realized.at(m.model_id);
      qx.push_back(req.features);
      qy.push_back(outcome.correct);
      std::vector<double> row = req.features;
      row.push_back(tok.predict(req.dataset_id) / 1000.0);
      lx.push_back(std::move(row));
      ly.push_back(outcome.latency_ms);
    }

    est.tokens_[m.model_id] = std::move(tok);
    est.quality_[m.model_id] = fit_quality_model(qx, qy, config);
    est.latency_[m.model_id] = fit_latency_model(lx, ly, config.latency_quantile,
                                                 config.min_latency_samples, m.model_id);
  }

  if (config.shared_temperature) {
    std::vector<double> logits;
    std::vector<bool> labels;
    for (const auto& m : pool.models) {
      const auto& q = est.quality_.at(m.model_id);
      if (q.constant_model) continue;
      for (const auto& req : calibration.requests) {
        double z = q.bias;
        for (std::size_t j = 0; j < q.weights.size() && j < req.features.size(); ++j) {
          z += q.weights[j] * req.features[j];
        }
        logits.push_back(z);
        labels.push_back(req.realized.at(m.model_id).correct);
      }
    }
    if (!logits.empty()) {
      const double t = fit_temperature(logits, labels, config);
      for (auto& [_, q] : est.quality_) {
        if (!q.constant_model) q.temperature = t;
      }
    }
  }
  return est;
}

PredictionBundle FittedEstimators::predict(const RequestInstance& request, const ModelPool& pool,
                                           const SLOConfig& slo,
                                           const GridIntensitySeries& grid) const {
  PredictionBundle bundle;
  bundle.per_model.reserve(pool.size());
  for (const auto& m : pool.models) {
    ModelPrediction p;
    p.t_hat_tokens = tokens(m.model_id).predict(request.dataset_id);
    p.p_hat = quality(m.model_id).predict(request.features);
    p.ell_p95_hat_ms = latency(m.model_id).predict(request.features, p.t_hat_tokens);
    p.c_hat_g = estimate_carbon_g(m, p.t_hat_tokens, request.arrival_time_s, grid);
    apply_margins(p, slo.margins);
    bundle.per_model.push_back(p);
  }
  return bundle;
}

const QualityModel& FittedEstimators::quality(const std::string& model_id) const {
  auto it = quality_.find(model_id);
  if (it == quality_.end()) throw DataError("no fitted quality model for '" + model_id + "'");
  return it->second;
}

const LatencyModel& FittedEstimators::latency(const std::string& model_id) const {
  auto it = latency_.find(model_id);
  if (it == latency_.end()) throw DataError("no fitted latency model for '" + model_id + "'");
  return it->second;
}

const TokenModel& FittedEstimators::tokens(const std::string& model_id) const {
  auto it = tokens_.find(model_id);
  if (it == tokens_.end()) throw DataError("no fitted token model for '" + model_id + "'");
  return it->second;
}

std::string FittedEstimators::to_json_string() const {
  json out;
  out["schema"] = "gar-estimators-v1";
  json q = json::object();
  for (const auto& [mid, model] : quality_) {
    q[mid] = json{{"constant_model", model.constant_model},
                  {"constant_p", model.constant_p},
                  {"weights", model.weights},
                  {"bias", model.bias},
                  {"temperature", model.temperature}};
  }
  out["quality"] = q;
  json l = json::object();
  for (const auto& [mid, model] : latency_) {
    l[mid] = json{{"coeffs", model.coeffs},
                  {"intercept", model.intercept},
                  {"quantile", model.quantile},
                  {"floor_ms", model.floor_ms}};
  }
  out["latency"] = l;
  json t = json::object();
  for (const auto& [mid, model] : tokens_) {
    t[mid] = json{{"per_dataset_mean", model.per_dataset_mean},
                  {"default_mean", model.default_mean}};
  }
  out["tokens"] = t;
  return out.dump(2);
}

FittedEstimators FittedEstimators::from_json_string(const std::string& text,
                                                    const std::string& source_name) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(source_name + ": malformed JSON: " + e.what());
  }
  try {
    if (obj.value("schema", "") != "gar-estimators-v1") {
      throw DataError(source_name + ": not a gar-estimators-v1 file");
    }
    FittedEstimators est;
    for (auto it = obj.at("quality").begin(); it != obj.at("quality").end(); ++it) {
      QualityModel m;
      m.constant_model = it.value().at("constant_model").get<bool>();
      m.constant_p = it.value().at("constant_p").get<double>();
      m.weights = it.value().at("weights").get<std::vector<double>>();
      m.bias = it.value().at("bias").get<double>();
      m.temperature = it.value().at("temperature").get<double>();
      est.quality_[it.key()] = std::move(m);
    }
    for (auto it = obj.at("latency").begin(); it != obj.at("latency").end(); ++it) {
      LatencyModel m;
      m.coeffs = it.value().at("coeffs").get<std::vector<double>>();
      m.intercept = it.value().at("intercept").get<double>();
      m.quantile = it.value().at("quantile").get<double>();
      m.floor_ms = it.value().at("floor_ms").get<double>();
      est.latency_[it.key()] = std::move(m);
    }
    for (auto it = obj.at("tokens").begin(); it != obj.at("tokens").end(); ++it) {
      TokenModel m;
      m.per_dataset_mean = it.value().at("per_dataset_mean").get<std::map<std::string, double>>();
      m.default_mean = it.value().at("default_mean").get<double>();
      est.tokens_[it.key()] = std::move(m);
    }
    return est;
  } catch (const json::exception& e) {
    throw DataError(source_name + ": " + e.what());
  }
}

void FittedEstimators::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write estimators file: " + path);
  }
  out << to_json_string() << "\n";
}

FittedEstimators FittedEstimators::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open estimators file: " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str(), path);
}

PredictionBundle OracleEstimators::predict(const RequestInstance& request, const ModelPool& pool,
                                           const SLOConfig& slo,
                                           const GridIntensitySeries& grid) const {
  PredictionBundle bundle;
  bundle.per_model.reserve(pool.size());
  for (const auto& m : pool.models) {
    auto it = request.realized.find(m.model_id);
    if (it == request.realized.end()) {
      throw DataError("oracle estimators: missing realized outcome for model '" + m.model_id +
                      "' at request " + std::to_string(request.request_index));
    }
    ModelPrediction p;
    p.p_hat = it->second.correct ? 1.0 : 0.0;
    p.ell_p95_hat_ms = it->second.latency_ms;
    p.c_hat_g = it->second.carbon_g;
    p.t_hat_tokens = static_cast<double>(it->second.output_tokens);
    apply_margins(p, slo.margins);
    bundle.per_model.push_back(p);
  }
  return bundle;
}

}  // namespace gar
