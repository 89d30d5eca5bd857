#include "gar/tracegen.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace gar {

using nlohmann::json;

std::string to_string(GridPattern p) {
  switch (p) {
    case GridPattern::constant: return "constant";
    case GridPattern::diurnal_sine: return "diurnal_sine";
    case GridPattern::two_region_alternating: return "two_region_alternating";
  }
  return "constant";
}

GridPattern grid_pattern_from_string(const std::string& s) {
  if (s == "constant") return GridPattern::constant;
  if (s == "diurnal_sine") return GridPattern::diurnal_sine;
  if (s == "two_region_alternating") return GridPattern::two_region_alternating;
  throw DataError("unknown grid pattern: '" + s + "'");
}

void GenSpec::validate() const {
  if (n_requests < 0) {
    throw DataError("gen spec: n_requests must be >= 0");
  }
  pool.validate();
  if (datasets.empty()) {
    throw DataError("gen spec: at least one dataset required");
  }
  for (const auto& d : datasets) {
    if (d.name.empty()) {
      throw DataError("gen spec: dataset with empty name");
    }
    if (!(d.token_scale > 0.0)) {
      throw DataError("gen spec: dataset '" + d.name + "': token_scale must be > 0");
    }
    for (const auto& m : pool.models) {
      auto it = d.correctness_prob.find(m.model_id);
      if (it == d.correctness_prob.end()) {
        throw DataError("gen spec: dataset '" + d.name + "' missing correctness_prob for model '" +
                        m.model_id + "'");
      }
      if (it->second < 0.0 || it->second > 1.0) {
        throw DataError("gen spec: correctness_prob out of [0,1] for dataset '" + d.name +
                        "', model '" + m.model_id + "'");
      }
    }
  }
  for (const auto& m : pool.models) {
    auto it = token_mean_per_model.find(m.model_id);
    if (it == token_mean_per_model.end() || !(it->second > 0.0)) {
      throw DataError("gen spec: token_mean_per_model must be > 0 for model '" + m.model_id + "'");
    }
    if (grid_base_g_per_kwh.find(m.region) == grid_base_g_per_kwh.end()) {
      throw DataError("gen spec: no grid_base_g_per_kwh for region '" + m.region + "'");
    }
  }
  for (const auto& [region, base] : grid_base_g_per_kwh) {
    if (!(base > 0.0)) {
      throw DataError("gen spec: grid_base_g_per_kwh for region '" + region + "' must be > 0");
    }
  }
  if (token_sigma < 0.0 || length_sigma < 0.0 || latency_sigma < 0.0) {
    throw DataError("gen spec: dispersion parameters must be >= 0");
  }
  if (!(request_spacing_s > 0.0) || !(grid_step_s > 0.0)) {
    throw DataError("gen spec: request_spacing_s and grid_step_s must be > 0");
  }
  if (grid_amplitude_frac < 0.0 || grid_amplitude_frac >= 1.0) {
    throw DataError("gen spec: grid_amplitude_frac must be in [0, 1)");
  }
}

std::string GenSpec::to_json_string() const {
  json datasets_json = json::array();
  for (const auto& d : datasets) {
    datasets_json.push_back(json{{"name", d.name},
                                 {"correctness_prob", d.correctness_prob},
                                 {"token_scale", d.token_scale}});
  }
  json pool_json = json::array();
  for (const auto& m : pool.models) {
    pool_json.push_back(json{{"model_id", m.model_id},
                             {"size_label", m.size_label},
                             {"region", m.region},
                             {"energy_base_alpha_wh", m.energy_base_alpha_wh},
                             {"energy_per_token_beta_wh_per_1k", m.energy_per_token_beta_wh_per_1k},
                             {"nominal_latency_ms", m.nominal_latency_ms}});
  }
  json obj{{"n_requests", n_requests},
           {"pool", pool_json},
           {"datasets", datasets_json},
           {"token_mean_per_model", token_mean_per_model},
           {"token_sigma", token_sigma},
           {"length_sigma", length_sigma},
           {"latency_sigma", latency_sigma},
           {"request_spacing_s", request_spacing_s},
           {"grid_pattern", to_string(grid_pattern)},
           {"grid_base_g_per_kwh", grid_base_g_per_kwh},
           {"grid_amplitude_frac", grid_amplitude_frac},
           {"grid_step_s", grid_step_s},
           {"seed", seed}};
  return obj.dump(2);
}

GenSpec GenSpec::from_json_string(const std::string& text, const std::string& source_name) {
  json obj;
  try {
    obj = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw DataError(source_name + ": malformed JSON: " + e.what());
  }
  try {
    GenSpec spec = default_spec();
    if (obj.contains("n_requests")) spec.n_requests = obj["n_requests"].get<long>();
    if (obj.contains("pool")) {
      spec.pool.models.clear();
      for (const auto& m : obj["pool"]) {
        ModelProfile p;
        p.model_id = m.at("model_id").get<std::string>();
        p.size_label = m.at("size_label").get<std::string>();
        p.region = m.at("region").get<std::string>();
        p.energy_base_alpha_wh = m.at("energy_base_alpha_wh").get<double>();
        p.energy_per_token_beta_wh_per_1k = m.at("energy_per_token_beta_wh_per_1k").get<double>();
        p.nominal_latency_ms = m.at("nominal_latency_ms").get<double>();
        spec.pool.models.push_back(std::move(p));
      }
    }
    if (obj.contains("datasets")) {
      spec.datasets.clear();
      for (const auto& d : obj["datasets"]) {
        DatasetGenSpec ds;
        ds.name = d.at("name").get<std::string>();
        ds.correctness_prob = d.at("correctness_prob").get<std::map<std::string, double>>();
        ds.token_scale = d.value("token_scale", 1.0);
        spec.datasets.push_back(std::move(ds));
      }
    }
    if (obj.contains("token_mean_per_model")) {
      spec.token_mean_per_model = obj["token_mean_per_model"].get<std::map<std::string, double>>();
    }
    if (obj.contains("token_sigma")) spec.token_sigma = obj["token_sigma"].get<double>();
    if (obj.contains("length_sigma")) spec.length_sigma = obj["length_sigma"].get<double>();
    if (obj.contains("latency_sigma")) spec.latency_sigma = obj["latency_sigma"].get<double>();
    if (obj.contains("request_spacing_s")) {
      spec.request_spacing_s = obj["request_spacing_s"].get<double>();
    }
    if (obj.contains("grid_pattern")) {
      spec.grid_pattern = grid_pattern_from_string(obj["grid_pattern"].get<std::string>());
    }
    if (obj.contains("grid_base_g_per_kwh")) {
      spec.grid_base_g_per_kwh = obj["grid_base_g_per_kwh"].get<std::map<std::string, double>>();
    }
    if (obj.contains("grid_amplitude_frac")) {
      spec.grid_amplitude_frac = obj["grid_amplitude_frac"].get<double>();
    }
    if (obj.contains("grid_step_s")) spec.grid_step_s = obj["grid_step_s"].get<double>();
    if (obj.contains("seed")) spec.seed = obj["seed"].get<std::uint64_t>();
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    throw DataError(source_name + ": " + e.what());
  }
}

GenSpec GenSpec::default_spec() {
  GenSpec spec;
  spec.pool.models = {
      {"mistral-7b", "7B", "na-east", 0.0, 2.2, 300.0},
      {"llama-3.1-8b", "8B", "na-east", 0.0, 2.5, 350.0},
      {"phi-3-medium-14b", "14B", "na-east", 0.0, 4.0, 500.0},
      {"qwen-2.5-14b", "14B", "na-east", 0.0, 4.5, 550.0},
      {"llama-3.3-70b", "70B", "eu-north", 0.0, 12.0, 1300.0},
  };
  // heterogeneous per-dataset rankings: each dataset has a different
  // best model, the small model is weak on the harder datasets
  auto probs = [](double m7, double l8, double p14, double q14, double l70) {
    return std::map<std::string, double>{{"mistral-7b", m7},
                                         {"llama-3.1-8b", l8},
                                         {"phi-3-medium-14b", p14},
                                         {"qwen-2.5-14b", q14},
                                         {"llama-3.3-70b", l70}};
  };
  spec.datasets = {
      {"mmlu", probs(0.55, 0.62, 0.72, 0.70, 0.90), 1.0},
      {"hellaswag", probs(0.68, 0.90, 0.74, 0.72, 0.80), 1.0},
      {"gsm8k", probs(0.50, 0.45, 0.55, 0.58, 0.92), 1.0},
      {"winogrande", probs(0.72, 0.70, 0.88, 0.74, 0.78), 0.8},
      {"squad", probs(0.90, 0.80, 0.78, 0.76, 0.82), 1.0},
      {"arc", probs(0.60, 0.66, 0.78, 0.80, 0.92), 1.0},
  };
  for (const auto& m : spec.pool.models) {
    spec.token_mean_per_model[m.model_id] = 500.0;
  }
  spec.grid_base_g_per_kwh = {{"na-east", 300.0}, {"eu-north", 120.0}};
  return spec;
}

namespace {

GridIntensitySeries build_grid(const GenSpec& spec) {
  GridIntensitySeries series;
  const double horizon_s =
      std::max(spec.request_spacing_s * static_cast<double>(spec.n_requests), spec.grid_step_s);
  std::size_t region_index = 0;
  for (const auto& [region, base] : spec.grid_base_g_per_kwh) {
    switch (spec.grid_pattern) {
      case GridPattern::constant:
        series.add_sample(region, 0.0, base);
        break;
      case GridPattern::diurnal_sine: {
        const double phase = 2.0 * M_PI * static_cast<double>(region_index) /
                             static_cast<double>(spec.grid_base_g_per_kwh.size());
        for (double t = 0.0; t <= horizon_s; t += spec.grid_step_s) {
          const double v =
              base * (1.0 + spec.grid_amplitude_frac * std::sin(2.0 * M_PI * t / 86400.0 + phase));
          series.add_sample(region, t, v);
        }
        break;
      }
      case GridPattern::two_region_alternating: {
        for (double t = 0.0; t <= horizon_s; t += spec.grid_step_s) {
          const long step = static_cast<long>(t / spec.grid_step_s);
          const bool high = (step + static_cast<long>(region_index)) % 2 == 0;
          series.add_sample(region,
                            t, base * (high ? 1.0 + spec.grid_amplitude_frac
                                            : 1.0 - spec.grid_amplitude_frac));
        }
        break;
      }
    }
    ++region_index;
  }
  series.finalize();
  return series;
}

}  // namespace

std::pair<Trace, GridIntensitySeries> generate(const GenSpec& spec) {
  spec.validate();
  GridIntensitySeries grid = build_grid(spec);

  Trace trace;
  for (const auto& m : spec.pool.models) {
    trace.header.model_ids.push_back(m.model_id);
  }
  trace.header.epoch_s = 0.0;

  Rng rng(spec.seed);
  const std::size_t n_datasets = spec.datasets.size();
  for (long i = 0; i < spec.n_requests; ++i) {
    RequestInstance req;
    req.request_index = i;
    req.arrival_time_s = spec.request_spacing_s * static_cast<double>(i);

    const std::size_t d = static_cast<std::size_t>(rng.next_below(n_datasets));
    const auto& dataset = spec.datasets[d];
    req.dataset_id = dataset.name;

    const double length_factor =
        spec.length_sigma > 0.0 ? std::exp(rng.normal(0.0, spec.length_sigma)) : 1.0;

    // features: dataset one-hot plus the log length factor
    req.features.assign(n_datasets + 1, 0.0);
    req.features[d] = 1.0;
    req.features[n_datasets] = std::log(length_factor);

    for (const auto& m : spec.pool.models) {
      RealizedOutcome out;
      const double token_noise =
          spec.token_sigma > 0.0 ? std::exp(rng.normal(0.0, spec.token_sigma)) : 1.0;
      const double mean_tokens = spec.token_mean_per_model.at(m.model_id) * dataset.token_scale;
      out.output_tokens =
          std::max<long>(0, std::lround(mean_tokens * length_factor * token_noise));

      const double energy_wh =
          m.energy_base_alpha_wh +
          m.energy_per_token_beta_wh_per_1k * static_cast<double>(out.output_tokens) / 1000.0;
      out.carbon_g = energy_wh / 1000.0 * grid.intensity_at(req.arrival_time_s, m.region);

      const double latency_noise =
          spec.latency_sigma > 0.0 ? std::exp(rng.normal(0.0, spec.latency_sigma)) : 1.0;
      out.latency_ms =
          std::max(1e-3, m.nominal_latency_ms * std::sqrt(length_factor) * latency_noise);

      out.correct = rng.bernoulli(dataset.correctness_prob.at(m.model_id));
      req.realized[m.model_id] = out;
    }
    trace.requests.push_back(std::move(req));
  }
  return {std::move(trace), std::move(grid)};
}

SplitResult split(const Trace& trace, double f_test, double f_validation, double f_calibration,
                  std::uint64_t seed) {
  if (f_test < 0.0 || f_validation < 0.0 || f_calibration < 0.0 ||
      std::fabs(f_test + f_validation + f_calibration - 1.0) > 1e-9) {
    throw DataError("split: fractions must be nonnegative and sum to 1");
  }
  const std::size_t n = trace.requests.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {  // Fisher-Yates
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(order[i - 1], order[j]);
  }
  const std::size_t n_test = static_cast<std::size_t>(std::lround(f_test * static_cast<double>(n)));
  const std::size_t n_val =
      std::min(n - n_test, static_cast<std::size_t>(std::lround(f_validation * static_cast<double>(n))));

  auto build = [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> picked(order.begin() + begin, order.begin() + end);
    std::sort(picked.begin(), picked.end());
    Trace out;
    out.header = trace.header;
    long idx = 0;
    for (std::size_t i : picked) {
      RequestInstance req = trace.requests[i];
      req.request_index = idx++;
      out.requests.push_back(std::move(req));
    }
    return out;
  };

  SplitResult result;
  result.test = build(0, n_test);
  result.validation = build(n_test, n_test + n_val);
  result.calibration = build(n_test + n_val, n);
  return result;
}

}  // namespace gar
