#ifndef GAR_APP_CONFIG_HPP
#define GAR_APP_CONFIG_HPP

#include <map>
#include <string>

#include "gar/engine.hpp"

namespace gar {

/// Fully resolved knob set: built-in defaults, overlaid by an optional
/// config file (JSON, comments allowed), overlaid by CLI flags. Unknown
/// config keys are rejected.
struct AppConfig {
  // SLO
  double gamma_c = 0.1;
  double gamma_ell = 0.05;
  double latency_target_ms = 3000.0;
  double default_floor = 0.6;
  std::map<std::string, double> floors;
  bool latency_margin_enabled = true;

  // policy
  std::string policy = "gar_pd";
  double epsilon = 0.05;
  double carbon_cap_g = 0.5;
  std::map<std::string, double> target_floors;
  double desired_target_accuracy = 0.7;

  // primal-dual
  std::size_t window_W = 100;
  double eta = 0.05;
  double budget_g = 0.0;  // 0 = resolve from budget_fraction
  double budget_fraction = 0.65;
  double alpha_q = 1.0;
  double alpha_ell = 1.0;
  bool strict_bw = false;

  std::uint64_t seed = 42;

  /// Overlays values from a JSON config file; throws DataError on unknown
  /// keys or malformed values.
  void load_file(const std::string& path);
  void load_string(const std::string& text, const std::string& source_name = "<string>");

  SLOConfig slo_config() const;
  PolicyConfig policy_config() const;
  RunConfig run_config() const;

  std::string dump_json() const;
};

}  // namespace gar

#endif  // GAR_APP_CONFIG_HPP
