#pragma once

// Engine configuration file: thresholds, marker lexicon, component names and
// token-cost settings, all optional with the built-in defaults.

#include <string>

#include <json.hpp>

#include "tme/error.hpp"
#include "tme/tokenizer.hpp"
#include "tme/trim.hpp"

namespace tme {

struct EngineConfig {
  TrimConfig trim;
  CostModel cost;
};

inline std::vector<std::vector<std::string>> marker_list_from_json(
    const nlohmann::ordered_json& arr, const std::string& path) {
  if (!arr.is_array()) fail(ErrorCode::schema_error, path + ": expected an array");
  std::vector<std::vector<std::string>> out;
  for (const auto& entry : arr) {
    std::vector<std::string> pattern;
    if (entry.is_string()) {
      pattern.push_back(entry.get<std::string>());
    } else if (entry.is_array()) {
      for (const auto& word : entry) pattern.push_back(word.get<std::string>());
    } else {
      fail(ErrorCode::schema_error, path + ": marker must be a string or string array");
    }
    if (pattern.empty()) fail(ErrorCode::schema_error, path + ": empty marker");
    out.push_back(std::move(pattern));
  }
  return out;
}

inline EngineConfig config_from_json(const nlohmann::ordered_json& doc) {
  if (!doc.is_object()) fail(ErrorCode::schema_error, "/: expected a config object");
  EngineConfig config;
  if (doc.contains("thresholds")) {
    const auto& t = doc["thresholds"];
    if (t.contains("high")) config.trim.thresholds.high = t["high"].get<double>();
    if (t.contains("moderate")) config.trim.thresholds.moderate = t["moderate"].get<double>();
    config.trim.thresholds.validate();
  }
  if (doc.contains("correction_markers"))
    config.trim.markers.correction =
        marker_list_from_json(doc["correction_markers"], "/correction_markers");
  if (doc.contains("cancellation_markers"))
    config.trim.markers.cancellation =
        marker_list_from_json(doc["cancellation_markers"], "/cancellation_markers");
  if (doc.contains("embedder")) {
    config.trim.embedder = doc["embedder"].get<std::string>();
    find_embedder(config.trim.embedder);
  }
  if (doc.contains("classifier")) {
    config.trim.classifier = doc["classifier"].get<std::string>();
    find_classifier(config.trim.classifier);
  }
  if (doc.contains("tokenizer")) {
    config.cost.tokenizer = doc["tokenizer"].get<std::string>();
    find_tokenizer(config.cost.tokenizer);
  }
  if (doc.contains("per_turn_overhead")) {
    config.cost.per_turn_overhead = doc["per_turn_overhead"].get<long>();
    if (config.cost.per_turn_overhead < 0)
      fail(ErrorCode::schema_error, "/per_turn_overhead: must be non-negative");
  }
  return config;
}

inline EngineConfig parse_config(const std::string& text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::schema_error, std::string("malformed config: ") + e.what());
  }
  return config_from_json(doc);
}

}  // namespace tme
