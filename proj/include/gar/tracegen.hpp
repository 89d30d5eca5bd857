#ifndef GAR_TRACEGEN_HPP
#define GAR_TRACEGEN_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gar/domain.hpp"
#include "gar/grid_carbon.hpp"

namespace gar {

enum class GridPattern { constant, diurnal_sine, two_region_alternating };

std::string to_string(GridPattern p);
GridPattern grid_pattern_from_string(const std::string& s);

struct DatasetGenSpec {
  std::string name;
  std::map<std::string, double> correctness_prob;  // model_id -> p
  double token_scale = 1.0;
};

/// Seeded synthetic workload description. Realized carbon is computed from
/// sampled tokens via the same energy formula the estimators use, so a
/// perfectly informed estimator is exact.
struct GenSpec {
  long n_requests = 1200;
  ModelPool pool;
  std::vector<DatasetGenSpec> datasets;
  std::map<std::string, double> token_mean_per_model;
  double token_sigma = 0.25;       // lognormal dispersion of per-model token counts
  double length_sigma = 0.2;       // shared per-request length factor dispersion
  double latency_sigma = 0.3;      // lognormal latency dispersion around the nominal
  double request_spacing_s = 60.0;
  GridPattern grid_pattern = GridPattern::constant;
  std::map<std::string, double> grid_base_g_per_kwh;  // per region
  double grid_amplitude_frac = 0.4;
  double grid_step_s = 3600.0;
  std::uint64_t seed = 42;

  void validate() const;

  std::string to_json_string() const;
  static GenSpec from_json_string(const std::string& text,
                                  const std::string& source_name = "<string>");

  /// Five-model pool over six datasets with heterogeneous per-dataset
  /// rankings (no model tops every dataset) and two grid regions.
  static GenSpec default_spec();
};

std::pair<Trace, GridIntensitySeries> generate(const GenSpec& spec);

struct SplitResult {
  Trace test;
  Trace validation;
  Trace calibration;
};

/// Deterministic seeded partition without overlap; each split keeps the
/// original arrival order and is reindexed from zero.
SplitResult split(const Trace& trace, double f_test, double f_validation, double f_calibration,
                  std::uint64_t seed = 42);

}  // namespace gar

#endif  // GAR_TRACEGEN_HPP
