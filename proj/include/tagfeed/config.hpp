#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "tagfeed/error.hpp"
#include "tagfeed/text.hpp"

namespace tagfeed {

/// Chat-completion endpoint and transport policy.
struct EndpointSettings {
  std::string url = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4";
  std::string api_key_env = "TAGFEED_API_KEY";
  int max_concurrency = 4;
  int max_attempts = 3;
  int initial_backoff_ms = 1000;
  int max_backoff_ms = 16000;
  int max_total_wait_ms = 60000;
  int timeout_seconds = 60;
  // 0 disables the shared limiter.
  double requests_per_second = 0.0;
};

struct PipelineConfig {
  double adequate_threshold = 0.65;
  double struggling_threshold = 0.55;
  int speed_cohort_cutoff = 40;
  double speed_extreme_fraction = 0.25;
  int min_attempts_per_dimension = 3;
  std::optional<std::string> knowledge_mapping_path;
  std::optional<std::string> ability_mapping_path;
  EndpointSettings endpoint;
};

enum class ConfigIssueKind {
  ThresholdOrder,
  FractionRange,
  CutoffRange,
  MinAttemptsRange,
  MissingMappingFile,
  EndpointSettings,
  UnknownKey,
  BadValue,
};

struct ConfigIssue {
  ConfigIssueKind kind;
  std::string message;
};

struct ConfigValidation {
  std::optional<PipelineConfig> config;  // set iff issues is empty
  std::vector<ConfigIssue> issues;

  bool ok() const { return issues.empty(); }
};

inline ConfigValidation validate_config(const PipelineConfig& cfg) {
  std::vector<ConfigIssue> issues;
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(cfg.adequate_threshold) || !in_unit(cfg.struggling_threshold)) {
    issues.push_back({ConfigIssueKind::FractionRange, "accuracy thresholds must lie in [0, 1]"});
  }
  if (!(cfg.struggling_threshold < cfg.adequate_threshold)) {
    issues.push_back({ConfigIssueKind::ThresholdOrder,
                      "struggling_threshold must be strictly below adequate_threshold"});
  }
  if (!(cfg.speed_extreme_fraction > 0.0 && cfg.speed_extreme_fraction <= 0.5)) {
    issues.push_back({ConfigIssueKind::FractionRange, "speed_extreme_fraction must lie in (0, 0.5]"});
  }
  if (cfg.speed_cohort_cutoff < 1) {
    issues.push_back({ConfigIssueKind::CutoffRange, "speed_cohort_cutoff must be at least 1"});
  }
  if (cfg.min_attempts_per_dimension < 1) {
    issues.push_back({ConfigIssueKind::MinAttemptsRange, "min_attempts_per_dimension must be at least 1"});
  }
  for (const auto& path : {cfg.knowledge_mapping_path, cfg.ability_mapping_path}) {
    if (path && !std::filesystem::is_regular_file(*path)) {
      issues.push_back({ConfigIssueKind::MissingMappingFile, "mapping file not found: " + *path});
    }
  }
  const auto& ep = cfg.endpoint;
  if (ep.max_concurrency < 1 || ep.max_attempts < 1 || ep.timeout_seconds < 1 ||
      ep.initial_backoff_ms < 0 || ep.max_backoff_ms < ep.initial_backoff_ms ||
      ep.max_total_wait_ms < 0 || ep.requests_per_second < 0.0) {
    issues.push_back({ConfigIssueKind::EndpointSettings, "endpoint settings out of range"});
  }
  ConfigValidation result;
  result.issues = std::move(issues);
  if (result.issues.empty()) result.config = cfg;
  return result;
}

/// Reads a flat key = value file over the defaults. Unknown keys and unparsable
/// values are reported as issues, as are invariant violations.
inline ConfigValidation parse_config(std::string_view content, PipelineConfig cfg = {}) {
  auto kv = text::parse_key_values(content);
  std::vector<ConfigIssue> issues;
  for (const auto& e : kv.errors) issues.push_back({ConfigIssueKind::BadValue, e});

  auto number = [&](const std::string& key, const std::string& value, auto& slot) {
    using T = std::remove_reference_t<decltype(slot)>;
    if constexpr (std::is_integral_v<T>) {
      if (auto v = text::parse_int(value)) {
        slot = static_cast<T>(*v);
        return;
      }
    } else {
      if (auto v = text::parse_double(value)) {
        slot = *v;
        return;
      }
    }
    issues.push_back({ConfigIssueKind::BadValue, key + ": cannot parse '" + value + "'"});
  };

  for (const auto& [key, value] : kv.entries) {
    if (key == "adequate_threshold") number(key, value, cfg.adequate_threshold);
    else if (key == "struggling_threshold") number(key, value, cfg.struggling_threshold);
    else if (key == "speed_cohort_cutoff") number(key, value, cfg.speed_cohort_cutoff);
    else if (key == "speed_extreme_fraction") number(key, value, cfg.speed_extreme_fraction);
    else if (key == "min_attempts_per_dimension") number(key, value, cfg.min_attempts_per_dimension);
    else if (key == "knowledge_mapping") cfg.knowledge_mapping_path = value;
    else if (key == "ability_mapping") cfg.ability_mapping_path = value;
    else if (key == "endpoint_url") cfg.endpoint.url = value;
    else if (key == "model") cfg.endpoint.model = value;
    else if (key == "api_key_env") cfg.endpoint.api_key_env = value;
    else if (key == "max_concurrency") number(key, value, cfg.endpoint.max_concurrency);
    else if (key == "max_attempts") number(key, value, cfg.endpoint.max_attempts);
    else if (key == "initial_backoff_ms") number(key, value, cfg.endpoint.initial_backoff_ms);
    else if (key == "max_backoff_ms") number(key, value, cfg.endpoint.max_backoff_ms);
    else if (key == "max_total_wait_ms") number(key, value, cfg.endpoint.max_total_wait_ms);
    else if (key == "timeout_seconds") number(key, value, cfg.endpoint.timeout_seconds);
    else if (key == "requests_per_second") number(key, value, cfg.endpoint.requests_per_second);
    else issues.push_back({ConfigIssueKind::UnknownKey, "unknown key: " + key});
  }

  auto validation = validate_config(cfg);
  issues.insert(issues.end(), validation.issues.begin(), validation.issues.end());
  ConfigValidation result;
  result.issues = std::move(issues);
  if (result.issues.empty()) result.config = cfg;
  return result;
}

inline ConfigValidation load_config(const std::string& path) {
  return parse_config(text::read_file(path));
}

}  // namespace tagfeed
