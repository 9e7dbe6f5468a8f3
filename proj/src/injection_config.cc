#include <sstream>

#include "aehcl/injection.h"

namespace aehcl {
namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

void set_injection_key(InjectionConfig& config, const std::string& key, const std::string& value) {
  if (key == "anomaly_fraction") {
    config.anomaly_fraction = parse_real(key, value);
  } else if (key == "k_candidates") {
    config.k_candidates = parse_uint(key, value);
  } else if (key == "strategy") {
    if (value == "farthest") {
      config.strategy = ReplacementStrategy::kFarthest;
    } else if (value == "uniform") {
      config.strategy = ReplacementStrategy::kUniform;
    } else {
      throw ValidationError("strategy: expected farthest or uniform, got '" + value + "'");
    }
  } else if (key == "seed") {
    config.seed = parse_uint(key, value);
  } else {
    throw ValidationError("unknown injection key '" + key + "'");
  }
}

void set_synth_key(SynthConfig& config, const std::string& key, const std::string& value) {
  if (key == "center_type") {
    config.center_type = value;
  } else if (key == "context_types") {
    config.context_types.clear();
    for (const auto& item : split(value, ',')) {
      const auto parts = split(item, ':');
      if (parts.size() != 3 || (parts[2] != "multi" && parts[2] != "single")) {
        throw ValidationError("context_types: expected name:count:multi|single, got '" + item + "'");
      }
      config.context_types.push_back({parts[0], parse_uint(key, parts[1]), parts[2] == "multi"});
    }
  } else if (key == "events") {
    config.events = parse_uint(key, value);
  } else if (key == "mean_context_size") {
    config.mean_context_size = parse_real(key, value);
  } else if (key == "feature_width") {
    config.feature_width = parse_uint(key, value);
  } else if (key == "communities") {
    config.communities = parse_uint(key, value);
  } else if (key == "feature_noise") {
    config.feature_noise = parse_real(key, value);
  } else if (key == "cross_community_rate") {
    config.cross_community_rate = parse_real(key, value);
  } else if (key == "seed") {
    config.seed = parse_uint(key, value);
  } else {
    throw ValidationError("unknown synthetic key '" + key + "'");
  }
}

std::string injection_config_text(const InjectionConfig& config) {
  std::ostringstream out;
  out << "anomaly_fraction = " << format_real(config.anomaly_fraction) << "\n"
      << "k_candidates = " << config.k_candidates << "\n"
      << "strategy = " << (config.strategy == ReplacementStrategy::kFarthest ? "farthest" : "uniform")
      << "\n"
      << "seed = " << config.seed << "\n";
  return out.str();
}

std::string synth_config_text(const SynthConfig& config) {
  std::ostringstream out;
  out << "center_type = " << config.center_type << "\n" << "context_types = ";
  for (std::size_t i = 0; i < config.context_types.size(); ++i) {
    const auto& t = config.context_types[i];
    out << (i ? "," : "") << t.name << ":" << t.count << ":" << (t.multiple ? "multi" : "single");
  }
  out << "\n"
      << "events = " << config.events << "\n"
      << "mean_context_size = " << format_real(config.mean_context_size) << "\n"
      << "feature_width = " << config.feature_width << "\n"
      << "communities = " << config.communities << "\n"
      << "feature_noise = " << format_real(config.feature_noise) << "\n"
      << "cross_community_rate = " << format_real(config.cross_community_rate) << "\n"
      << "seed = " << config.seed << "\n";
  return out.str();
}

}  // namespace aehcl
