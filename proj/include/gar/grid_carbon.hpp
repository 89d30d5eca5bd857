#ifndef GAR_GRID_CARBON_HPP
#define GAR_GRID_CARBON_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gar/common.hpp"

namespace gar {

/// Time-varying grid carbon intensity per region, queried as a step
/// function (last-sample-hold).
class GridIntensitySeries {
 public:
  using Sample = std::pair<double, double>;  // (timestamp_s, intensity_g_per_kwh)

  /// CSV columns: timestamp_s, region, intensity_g_per_kwh. Rows may arrive
  /// unsorted; they are sorted per region on load. Nonpositive intensity is
  /// rejected with the offending line number.
  static GridIntensitySeries load_csv(const std::string& path);
  static GridIntensitySeries parse_csv(std::istream& in, const std::string& source_name);

  /// Single constant reading per region, for experiments without a series file.
  static GridIntensitySeries constant(const std::map<std::string, double>& per_region);

  void add_sample(const std::string& region, double timestamp_s, double intensity_g_per_kwh);

  /// Sorts samples and checks for duplicate timestamps; call once after a
  /// batch of add_sample calls.
  void finalize();

  /// Intensity of the latest sample with timestamp <= t; the first sample's
  /// value when t precedes it. Throws DataError for unknown regions.
  double intensity_at(double t_s, const std::string& region) const;

  bool has_region(const std::string& region) const { return by_region_.count(region) > 0; }
  std::vector<std::string> regions() const;
  const std::vector<Sample>& samples(const std::string& region) const;

  void write_csv(const std::string& path) const;

 private:
  std::map<std::string, std::vector<Sample>> by_region_;
};

}  // namespace gar

#endif  // GAR_GRID_CARBON_HPP
