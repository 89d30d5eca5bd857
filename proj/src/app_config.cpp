#include "gar/app_config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gar {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& context) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw DataError("config: unknown key '" + context + it.key() + "'");
    }
  }
}

}  // namespace

void AppConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open config file: " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  load_string(ss.str(), path);
}

void AppConfig::load_string(const std::string& text, const std::string& source_name) {
  json obj;
  try {
    obj = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw DataError(source_name + ": malformed JSON: " + e.what());
  }
  try {
    check_keys(obj, {"slo", "policy", "seed"}, "");
    if (obj.contains("slo")) {
      const auto& slo = obj["slo"];
      check_keys(slo,
                 {"gamma_c", "gamma_ell", "latency_target_ms", "default_floor", "floors",
                  "latency_margin_enabled"},
                 "slo.");
      if (slo.contains("gamma_c")) gamma_c = slo["gamma_c"].get<double>();
      if (slo.contains("gamma_ell")) gamma_ell = slo["gamma_ell"].get<double>();
      if (slo.contains("latency_target_ms")) {
        latency_target_ms = slo["latency_target_ms"].get<double>();
      }
      if (slo.contains("default_floor")) default_floor = slo["default_floor"].get<double>();
      if (slo.contains("floors")) floors = slo["floors"].get<std::map<std::string, double>>();
      if (slo.contains("latency_margin_enabled")) {
        latency_margin_enabled = slo["latency_margin_enabled"].get<bool>();
      }
    }
    if (obj.contains("policy")) {
      const auto& pol = obj["policy"];
      check_keys(pol,
                 {"variant", "epsilon", "carbon_cap_g", "target_floors",
                  "desired_target_accuracy", "window_W", "eta", "budget_g", "budget_fraction",
                  "alpha_q", "alpha_ell", "strict_bw"},
                 "policy.");
      if (pol.contains("variant")) policy = pol["variant"].get<std::string>();
      if (pol.contains("epsilon")) epsilon = pol["epsilon"].get<double>();
      if (pol.contains("carbon_cap_g")) carbon_cap_g = pol["carbon_cap_g"].get<double>();
      if (pol.contains("target_floors")) {
        target_floors = pol["target_floors"].get<std::map<std::string, double>>();
      }
      if (pol.contains("desired_target_accuracy")) {
        desired_target_accuracy = pol["desired_target_accuracy"].get<double>();
      }
      if (pol.contains("window_W")) window_W = pol["window_W"].get<std::size_t>();
      if (pol.contains("eta")) eta = pol["eta"].get<double>();
      if (pol.contains("budget_g")) budget_g = pol["budget_g"].get<double>();
      if (pol.contains("budget_fraction")) budget_fraction = pol["budget_fraction"].get<double>();
      if (pol.contains("alpha_q")) alpha_q = pol["alpha_q"].get<double>();
      if (pol.contains("alpha_ell")) alpha_ell = pol["alpha_ell"].get<double>();
      if (pol.contains("strict_bw")) strict_bw = pol["strict_bw"].get<bool>();
    }
    if (obj.contains("seed")) seed = obj["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw DataError(source_name + ": " + e.what());
  }
}

SLOConfig AppConfig::slo_config() const {
  SLOConfig slo;
  slo.accuracy_floor = floors;
  slo.default_floor = default_floor;
  slo.latency_target_ms = latency_target_ms;
  slo.margins.gamma_c = gamma_c;
  slo.margins.gamma_ell = latency_margin_enabled ? gamma_ell : 0.0;
  return slo;
}

PolicyConfig AppConfig::policy_config() const {
  PolicyConfig cfg;
  cfg.variant = policy_variant_from_string(policy);
  cfg.carbon_cap_g = carbon_cap_g;
  cfg.epsilon = epsilon;
  cfg.target_floors = target_floors;
  cfg.pd.alpha_q = alpha_q;
  cfg.pd.alpha_ell = alpha_ell;
  cfg.pd.eta = eta;
  cfg.pd.budget_B_g = budget_g;
  cfg.pd.window_W = window_W;
  return cfg;
}

RunConfig AppConfig::run_config() const {
  RunConfig cfg;
  cfg.policy = policy_config();
  cfg.slo = slo_config();
  cfg.seed = seed;
  cfg.budget_fraction = budget_fraction;
  cfg.strict_bw = strict_bw;
  return cfg;
}

std::string AppConfig::dump_json() const {
  json obj{{"slo",
            json{{"gamma_c", gamma_c},
                 {"gamma_ell", gamma_ell},
                 {"latency_target_ms", latency_target_ms},
                 {"default_floor", default_floor},
                 {"floors", floors},
                 {"latency_margin_enabled", latency_margin_enabled}}},
           {"policy",
            json{{"variant", policy},
                 {"epsilon", epsilon},
                 {"carbon_cap_g", carbon_cap_g},
                 {"target_floors", target_floors},
                 {"desired_target_accuracy", desired_target_accuracy},
                 {"window_W", window_W},
                 {"eta", eta},
                 {"budget_g", budget_g},
                 {"budget_fraction", budget_fraction},
                 {"alpha_q", alpha_q},
                 {"alpha_ell", alpha_ell},
                 {"strict_bw", strict_bw}}},
           {"seed", seed}};
  return obj.dump(2);
}

}  // namespace gar
