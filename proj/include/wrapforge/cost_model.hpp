#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace wrapforge {

struct ThroughputPreset {
  std::string name;
  double generation_tokens_per_gpu_hour = 0;
  double training_tokens_per_second = 0;  // whole cluster
  int training_gpus = 1;

  void validate() const;
  friend bool operator==(const ThroughputPreset&, const ThroughputPreset&) = default;
};

/// "paper-mistral7b": 3M generated tokens per A100-hour; 0.5M training
/// tokens per second on 64 A100s.
ThroughputPreset builtin_preset(std::string_view name);
std::vector<std::string> builtin_preset_names();

nlohmann::ordered_json to_json(const ThroughputPreset& p);
ThroughputPreset preset_from_json(const nlohmann::json& j);

/// tokens / rate.
double generation_gpu_hours(double tokens, double tokens_per_gpu_hour);
/// tokens / cluster_rate / 3600 * gpus.
double training_gpu_hours(double tokens, double cluster_tokens_per_second, int gpus);

/// A published figure next to what the stated rates give.
struct QuotedFigure {
  std::string label;
  double stated = 0;
  double computed = 0;

  double relative_gap() const { return stated == 0 ? 0 : (computed - stated) / stated; }
};

struct BreakevenReport {
  std::string preset;
  double generation_tokens = 0;
  double training_tokens = 0;
  double generation_gpu_hours = 0;
  double training_gpu_hours = 0;
  double ratio = 0;  // generation / training
  std::vector<QuotedFigure> quoted;  // only for the built-in preset at its default token counts
  std::string note;

  nlohmann::ordered_json to_json() const;
  std::string to_text() const;
};

BreakevenReport breakeven_report(double gen_tokens, double train_tokens, const ThroughputPreset& preset);

}  // namespace wrapforge
