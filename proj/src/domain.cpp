#include "gar/domain.hpp"

#include <cctype>
#include <set>

namespace gar {

int ModelPool::index_of(const std::string& model_id) const {
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (models[i].model_id == model_id) return static_cast<int>(i);
  }
  return -1;
}

void ModelPool::validate() const {
  if (models.empty()) {
    throw DataError("model pool is empty");
  }
  std::set<std::string> seen;
  for (const auto& m : models) {
    if (m.model_id.empty()) {
      throw DataError("model with empty model_id");
    }
    if (!seen.insert(m.model_id).second) {
      throw DataError("duplicate model_id in pool: " + m.model_id);
    }
    if (m.energy_base_alpha_wh < 0.0) {
      throw DataError("model " + m.model_id + ": energy_base_alpha_wh must be >= 0");
    }
    if (!(m.energy_per_token_beta_wh_per_1k > 0.0)) {
      throw DataError("model " + m.model_id + ": energy_per_token_beta_wh_per_1k must be > 0");
    }
  }
}

double ModelPool::parse_param_count(const std::string& size_label) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(size_label, &pos);
  } catch (const std::exception&) {
    throw DataError("unparseable size_label: '" + size_label + "'");
  }
  double mult = 1.0;
  if (pos < size_label.size()) {
    switch (std::toupper(static_cast<unsigned char>(size_label[pos]))) {
      case 'K': mult = 1e3; break;
      case 'M': mult = 1e6; break;
      case 'B': mult = 1e9; break;
      case 'T': mult = 1e12; break;
      default:
        throw DataError("unparseable size_label suffix: '" + size_label + "'");
    }
  }
  return value * mult;
}

std::size_t ModelPool::largest_index() const {
  std::size_t best = 0;
  double best_count = parse_param_count(models[0].size_label);
  for (std::size_t i = 1; i < models.size(); ++i) {
    const double c = parse_param_count(models[i].size_label);
    if (c > best_count) {
      best = i;
      best_count = c;
    }
  }
  return best;
}

std::size_t ModelPool::smallest_index() const {
  std::size_t best = 0;
  double best_count = parse_param_count(models[0].size_label);
  for (std::size_t i = 1; i < models.size(); ++i) {
    const double c = parse_param_count(models[i].size_label);
    if (c < best_count) {
      best = i;
      best_count = c;
    }
  }
  return best;
}

double SLOConfig::floor_for(const std::string& dataset_id) const {
  auto it = accuracy_floor.find(dataset_id);
  if (it != accuracy_floor.end()) return it->second;
  if (default_floor.has_value()) return *default_floor;
  throw DataError("no accuracy floor configured for dataset '" + dataset_id + "'");
}

std::string to_string(FallbackReason r) {
  switch (r) {
    case FallbackReason::none: return "none";
    case FallbackReason::empty_feasible: return "empty_feasible";
    case FallbackReason::empty_after_cap: return "empty_after_cap";
  }
  return "none";
}

FallbackReason fallback_reason_from_string(const std::string& s) {
  if (s == "none") return FallbackReason::none;
  if (s == "empty_feasible") return FallbackReason::empty_feasible;
  if (s == "empty_after_cap") return FallbackReason::empty_after_cap;
  throw DataError("unknown fallback_reason: '" + s + "'");
}

std::vector<TraceViolation> validate_trace(const Trace& trace, const ModelPool& pool) {
  std::vector<TraceViolation> out;
  double prev_time = -1.0;
  long expected_index = 0;
  for (const auto& req : trace.requests) {
    if (req.request_index != expected_index) {
      out.push_back({req.request_index, "",
                     "request_index " + std::to_string(req.request_index) +
                         " out of sequence (expected " + std::to_string(expected_index) + ")"});
    }
    ++expected_index;
    if (prev_time >= 0.0 && req.arrival_time_s < prev_time) {
      out.push_back({req.request_index, "",
                     "arrival_time_s decreases between consecutive requests"});
    }
    prev_time = req.arrival_time_s;
    for (const auto& m : pool.models) {
      auto it = req.realized.find(m.model_id);
      if (it == req.realized.end()) {
        out.push_back({req.request_index, m.model_id, "missing realized outcome"});
        continue;
      }
      const auto& r = it->second;
      if (!(r.latency_ms > 0.0)) {
        out.push_back({req.request_index, m.model_id, "latency_ms must be > 0"});
      }
      if (r.carbon_g < 0.0) {
        out.push_back({req.request_index, m.model_id, "carbon_g must be >= 0"});
      }
      if (r.output_tokens < 0) {
        out.push_back({req.request_index, m.model_id, "output_tokens must be >= 0"});
      }
    }
  }
  return out;
}

}  // namespace gar
