#include "gar/trace_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gar {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
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
      throw DataError(context + ": unknown field '" + it.key() + "'");
    }
  }
}

RealizedOutcome parse_outcome(const json& obj, const std::string& context) {
  reject_unknown_keys(obj, {"correct", "latency_ms", "carbon_g", "output_tokens"}, context);
  RealizedOutcome out;
  out.correct = obj.at("correct").get<bool>();
  out.latency_ms = obj.at("latency_ms").get<double>();
  out.carbon_g = obj.at("carbon_g").get<double>();
  out.output_tokens = obj.at("output_tokens").get<long>();
  return out;
}

json outcome_to_json(const RealizedOutcome& r) {
  return json{{"correct", r.correct},
              {"latency_ms", r.latency_ms},
              {"carbon_g", r.carbon_g},
              {"output_tokens", r.output_tokens}};
}

ModelProfile parse_profile(const json& obj, const std::string& context) {
  reject_unknown_keys(obj,
                      {"model_id", "size_label", "region", "energy_base_alpha_wh",
                       "energy_per_token_beta_wh_per_1k", "nominal_latency_ms"},
                      context);
  ModelProfile m;
  m.model_id = obj.at("model_id").get<std::string>();
  m.size_label = obj.at("size_label").get<std::string>();
  m.region = obj.at("region").get<std::string>();
  m.energy_base_alpha_wh = obj.at("energy_base_alpha_wh").get<double>();
  m.energy_per_token_beta_wh_per_1k = obj.at("energy_per_token_beta_wh_per_1k").get<double>();
  m.nominal_latency_ms = obj.at("nominal_latency_ms").get<double>();
  return m;
}

}  // namespace

Trace read_trace(std::istream& in, const std::string& source_name) {
  Trace trace;
  std::string line;
  long line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(source_name + ":" + std::to_string(line_no) +
                      ": malformed JSON: " + e.what());
    }
    const std::string context = source_name + ":" + std::to_string(line_no);
    try {
      if (!have_header) {
        reject_unknown_keys(obj, {"type", "schema", "model_ids", "epoch_s"}, context);
        if (obj.value("type", "") != "header" || obj.value("schema", "") != "gar-trace-v1") {
          throw DataError(context + ": first line must be a gar-trace-v1 header");
        }
        trace.header.model_ids = obj.at("model_ids").get<std::vector<std::string>>();
        trace.header.epoch_s = obj.at("epoch_s").get<double>();
        have_header = true;
        continue;
      }
      reject_unknown_keys(
          obj, {"request_index", "dataset_id", "arrival_time_s", "features", "realized"}, context);
      RequestInstance req;
      req.request_index = obj.at("request_index").get<long>();
      req.dataset_id = obj.at("dataset_id").get<std::string>();
      req.arrival_time_s = obj.at("arrival_time_s").get<double>();
      req.features = obj.at("features").get<std::vector<double>>();
      for (auto it = obj.at("realized").begin(); it != obj.at("realized").end(); ++it) {
        req.realized[it.key()] = parse_outcome(it.value(), context + " realized." + it.key());
      }
      trace.requests.push_back(std::move(req));
    } catch (const json::exception& e) {
      throw DataError(context + ": " + e.what());
    }
  }
  if (!have_header) {
    throw DataError(source_name + ": missing trace header");
  }
  return trace;
}

Trace read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open trace file: " + path);
  }
  return read_trace(in, path);
}

void write_trace(const Trace& trace, std::ostream& out) {
  json header{{"type", "header"},
              {"schema", "gar-trace-v1"},
              {"model_ids", trace.header.model_ids},
              {"epoch_s", trace.header.epoch_s}};
  out << header.dump() << "\n";
  for (const auto& req : trace.requests) {
    json realized = json::object();
    for (const auto& [mid, r] : req.realized) {
      realized[mid] = outcome_to_json(r);
    }
    json obj{{"request_index", req.request_index},
             {"dataset_id", req.dataset_id},
             {"arrival_time_s", req.arrival_time_s},
             {"features", req.features},
             {"realized", realized}};
    out << obj.dump() << "\n";
  }
}

void write_trace_file(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write trace file: " + path);
  }
  write_trace(trace, out);
}

ModelPool pool_from_json_string(const std::string& json_text, const std::string& source_name) {
  json arr;
  try {
    arr = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DataError(source_name + ": malformed JSON: " + e.what());
  }
  if (!arr.is_array()) {
    throw DataError(source_name + ": pool file must be a JSON array of model profiles");
  }
  ModelPool pool;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    try {
      pool.models.push_back(parse_profile(arr[i], source_name + " model[" + std::to_string(i) + "]"));
    } catch (const json::exception& e) {
      throw DataError(source_name + " model[" + std::to_string(i) + "]: " + e.what());
    }
  }
  pool.validate();
  return pool;
}

ModelPool read_pool_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open pool file: " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return pool_from_json_string(ss.str(), path);
}

std::string pool_to_json_string(const ModelPool& pool) {
  json arr = json::array();
  for (const auto& m : pool.models) {
    arr.push_back(json{{"model_id", m.model_id},
                       {"size_label", m.size_label},
                       {"region", m.region},
                       {"energy_base_alpha_wh", m.energy_base_alpha_wh},
                       {"energy_per_token_beta_wh_per_1k", m.energy_per_token_beta_wh_per_1k},
                       {"nominal_latency_ms", m.nominal_latency_ms}});
  }
  return arr.dump(2);
}

void write_pool_file(const ModelPool& pool, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write pool file: " + path);
  }
  out << pool_to_json_string(pool) << "\n";
}

std::string decision_to_json_line(const RoutingDecision& d) {
  json obj{{"request_index", d.request_index},
           {"chosen_model_id", d.chosen_model_id},
           {"feasible_model_ids", d.feasible_model_ids},
           {"used_fallback", d.used_fallback},
           {"fallback_reason", to_string(d.fallback_reason)},
           {"lambda_snapshot", d.lambda_snapshot},
           {"predicted",
            json{{"p_hat", d.predicted_p_hat},
                 {"ell_tilde_ms", d.predicted_ell_tilde_ms},
                 {"c_tilde_g", d.predicted_c_tilde_g}}},
           {"realized", outcome_to_json(d.realized)}};
  if (!d.score_per_model.empty()) {
    obj["score_per_model"] = d.score_per_model;
  }
  return obj.dump();
}

RoutingDecision decision_from_json_line(const std::string& line, const std::string& source_name) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(source_name + ": malformed JSON: " + e.what());
  }
  try {
    reject_unknown_keys(obj,
                        {"request_index", "chosen_model_id", "feasible_model_ids", "used_fallback",
                         "fallback_reason", "lambda_snapshot", "predicted", "realized",
                         "score_per_model"},
                        source_name);
    RoutingDecision d;
    d.request_index = obj.at("request_index").get<long>();
    d.chosen_model_id = obj.at("chosen_model_id").get<std::string>();
    d.feasible_model_ids = obj.at("feasible_model_ids").get<std::vector<std::string>>();
    d.used_fallback = obj.at("used_fallback").get<bool>();
    d.fallback_reason = fallback_reason_from_string(obj.at("fallback_reason").get<std::string>());
    d.lambda_snapshot = obj.at("lambda_snapshot").get<double>();
    const auto& pred = obj.at("predicted");
    reject_unknown_keys(pred, {"p_hat", "ell_tilde_ms", "c_tilde_g"}, source_name + " predicted");
    d.predicted_p_hat = pred.at("p_hat").get<double>();
    d.predicted_ell_tilde_ms = pred.at("ell_tilde_ms").get<double>();
    d.predicted_c_tilde_g = pred.at("c_tilde_g").get<double>();
    d.realized = parse_outcome(obj.at("realized"), source_name + " realized");
    if (obj.contains("score_per_model")) {
      d.score_per_model = obj.at("score_per_model").get<std::map<std::string, double>>();
    }
    return d;
  } catch (const json::exception& e) {
    throw DataError(source_name + ": " + e.what());
  }
}

std::string decisions_to_jsonl(const std::vector<RoutingDecision>& decisions) {
  std::string out;
  for (const auto& d : decisions) {
    out += decision_to_json_line(d);
    out += "\n";
  }
  return out;
}

void write_decisions_file(const std::vector<RoutingDecision>& decisions, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write decisions file: " + path);
  }
  out << decisions_to_jsonl(decisions);
}

}  // namespace gar
