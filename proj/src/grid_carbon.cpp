#include "gar/grid_carbon.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace gar {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return fields;
}

}  // namespace

GridIntensitySeries GridIntensitySeries::parse_csv(std::istream& in,
                                                   const std::string& source_name) {
  GridIntensitySeries series;
  std::string line;
  long line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (!have_header) {
      if (fields.size() != 3 || fields[0] != "timestamp_s" || fields[1] != "region" ||
          fields[2] != "intensity_g_per_kwh") {
        throw DataError(source_name + ":" + std::to_string(line_no) +
                        ": expected header 'timestamp_s,region,intensity_g_per_kwh'");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != 3) {
      throw DataError(source_name + ":" + std::to_string(line_no) + ": expected 3 columns, got " +
                      std::to_string(fields.size()));
    }
    double ts, intensity;
    try {
      ts = std::stod(fields[0]);
      intensity = std::stod(fields[2]);
    } catch (const std::exception&) {
      throw DataError(source_name + ":" + std::to_string(line_no) + ": malformed numeric field");
    }
    if (!(intensity > 0.0)) {
      throw DataError(source_name + ":" + std::to_string(line_no) +
                      ": intensity_g_per_kwh must be > 0");
    }
    if (fields[1].empty()) {
      throw DataError(source_name + ":" + std::to_string(line_no) + ": empty region");
    }
    series.add_sample(fields[1], ts, intensity);
  }
  if (!have_header) {
    throw DataError(source_name + ": empty grid intensity file");
  }
  series.finalize();
  return series;
}

GridIntensitySeries GridIntensitySeries::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open grid intensity file: " + path);
  }
  return parse_csv(in, path);
}

GridIntensitySeries GridIntensitySeries::constant(const std::map<std::string, double>& per_region) {
  GridIntensitySeries series;
  for (const auto& [region, value] : per_region) {
    if (!(value > 0.0)) {
      throw DataError("constant grid intensity for region '" + region + "' must be > 0");
    }
    series.add_sample(region, 0.0, value);
  }
  series.finalize();
  return series;
}

void GridIntensitySeries::add_sample(const std::string& region, double timestamp_s,
                                     double intensity_g_per_kwh) {
  if (!(intensity_g_per_kwh > 0.0)) {
    throw DataError("grid intensity must be > 0 (region '" + region + "')");
  }
  by_region_[region].emplace_back(timestamp_s, intensity_g_per_kwh);
}

void GridIntensitySeries::finalize() {
  for (auto& [region, samples] : by_region_) {
    std::sort(samples.begin(), samples.end(),
              [](const Sample& a, const Sample& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < samples.size(); ++i) {
      if (samples[i].first == samples[i - 1].first) {
        throw DataError("duplicate timestamp " + std::to_string(samples[i].first) +
                        " in region '" + region + "'");
      }
    }
  }
}

double GridIntensitySeries::intensity_at(double t_s, const std::string& region) const {
  auto it = by_region_.find(region);
  if (it == by_region_.end() || it->second.empty()) {
    throw DataError("unknown grid region: '" + region + "'");
  }
  const auto& samples = it->second;
  // latest sample with timestamp <= t; clamp to first sample before the series
  auto pos = std::upper_bound(samples.begin(), samples.end(), t_s,
                              [](double t, const Sample& s) { return t < s.first; });
  if (pos == samples.begin()) return samples.front().second;
  return std::prev(pos)->second;
}

std::vector<std::string> GridIntensitySeries::regions() const {
  std::vector<std::string> out;
  out.reserve(by_region_.size());
  for (const auto& [region, _] : by_region_) out.push_back(region);
  return out;
}

const std::vector<GridIntensitySeries::Sample>& GridIntensitySeries::samples(
    const std::string& region) const {
  auto it = by_region_.find(region);
  if (it == by_region_.end()) {
    throw DataError("unknown grid region: '" + region + "'");
  }
  return it->second;
}

void GridIntensitySeries::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write grid intensity file: " + path);
  }
  out << "timestamp_s,region,intensity_g_per_kwh\n";
  for (const auto& [region, samples] : by_region_) {
    for (const auto& [ts, value] : samples) {
      out << ts << "," << region << "," << value << "\n";
    }
  }
}

}  // namespace gar
