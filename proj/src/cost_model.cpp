#include "wrapforge/cost_model.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace wrapforge {

namespace {
constexpr std::string_view kPaperPreset = "paper-mistral7b";
}

void ThroughputPreset::validate() const {
  if (name.empty()) throw std::invalid_argument("preset name must be non-empty");
  if (!(generation_tokens_per_gpu_hour > 0) || !(training_tokens_per_second > 0)) {
    throw std::invalid_argument("preset '" + name + "': rates must be positive");
  }
  if (training_gpus < 1) throw std::invalid_argument("preset '" + name + "': gpus must be >= 1");
}

ThroughputPreset builtin_preset(std::string_view name) {
  if (name == kPaperPreset) return {std::string(kPaperPreset), 3e6, 0.5e6, 64};
  throw std::invalid_argument("unknown preset: " + std::string(name));
}

std::vector<std::string> builtin_preset_names() { return {std::string(kPaperPreset)}; }

nlohmann::ordered_json to_json(const ThroughputPreset& p) {
  return {{"name", p.name},
          {"generation_tokens_per_gpu_hour", p.generation_tokens_per_gpu_hour},
          {"training_tokens_per_second", p.training_tokens_per_second},
          {"training_gpus", p.training_gpus}};
}

ThroughputPreset preset_from_json(const nlohmann::json& j) {
  ThroughputPreset p{j.at("name").get<std::string>(), j.at("generation_tokens_per_gpu_hour").get<double>(),
                     j.at("training_tokens_per_second").get<double>(), j.at("training_gpus").get<int>()};
  p.validate();
  return p;
}

double generation_gpu_hours(double tokens, double tokens_per_gpu_hour) {
  if (tokens < 0) throw std::invalid_argument("tokens must be >= 0");
  if (!(tokens_per_gpu_hour > 0)) throw std::invalid_argument("rate must be positive");
  return tokens / tokens_per_gpu_hour;
}

double training_gpu_hours(double tokens, double cluster_tokens_per_second, int gpus) {
  if (tokens < 0) throw std::invalid_argument("tokens must be >= 0");
  if (!(cluster_tokens_per_second > 0) || gpus < 1) throw std::invalid_argument("rate and gpus must be positive");
  return tokens / cluster_tokens_per_second / 3600.0 * gpus;
}

BreakevenReport breakeven_report(double gen_tokens, double train_tokens, const ThroughputPreset& preset) {
  preset.validate();
  BreakevenReport r;
  r.preset = preset.name;
  r.generation_tokens = gen_tokens;
  r.training_tokens = train_tokens;
  r.generation_gpu_hours = generation_gpu_hours(gen_tokens, preset.generation_tokens_per_gpu_hour);
  r.training_gpu_hours = training_gpu_hours(train_tokens, preset.training_tokens_per_second, preset.training_gpus);
  r.ratio = r.training_gpu_hours > 0 ? r.generation_gpu_hours / r.training_gpu_hours : 0.0;
  r.note =
      "Generation is a one-time cost: the synthetic corpus can be reused across every model "
      "trained on it, while training cost recurs per run.";
  if (preset.name == kPaperPreset && gen_tokens == 85e9 && train_tokens == 300e9) {
    // Published figures for this exact setting, next to what the rates imply.
    r.quoted = {
        {"generation GPU hours (stated 'about 25K')", 25000.0, r.generation_gpu_hours},
        {"training GPU hours (stated 'about 6k')", 6000.0, r.training_gpu_hours},
        {"'256 GPU days' read as 256 x 24 GPU hours", 256.0 * 24.0, r.training_gpu_hours},
        {"training GPU days (stated 256)", 256.0, r.training_gpu_hours / 24.0},
    };
  }
  return r;
}

nlohmann::ordered_json BreakevenReport::to_json() const {
  nlohmann::ordered_json q = nlohmann::ordered_json::array();
  for (const auto& f : quoted) {
    q.push_back({{"label", f.label}, {"stated", f.stated}, {"computed", f.computed},
                 {"relative_gap", f.relative_gap()}});
  }
  return {{"preset", preset},
          {"generation_tokens", generation_tokens},
          {"training_tokens", training_tokens},
          {"generation_gpu_hours", generation_gpu_hours},
          {"training_gpu_hours", training_gpu_hours},
          {"generation_to_training_ratio", ratio},
          {"quoted_figures", q},
          {"note", note}};
}

std::string BreakevenReport::to_text() const {
  char buf[512];
  std::string out;
  std::snprintf(buf, sizeof buf, "preset                 %s\n", preset.c_str());
  out += buf;
  std::snprintf(buf, sizeof buf, "generation             %.4g tokens -> %.1f GPU hours\n", generation_tokens,
                generation_gpu_hours);
  out += buf;
  std::snprintf(buf, sizeof buf, "training               %.4g tokens -> %.1f GPU hours\n", training_tokens,
                training_gpu_hours);
  out += buf;
  std::snprintf(buf, sizeof buf, "generation / training  %.4f\n", ratio);
  out += buf;
  for (const auto& f : quoted) {
    std::snprintf(buf, sizeof buf, "FLAG %s: stated %.1f, computed %.1f (%+.1f%%)\n", f.label.c_str(), f.stated,
                  f.computed, 100.0 * f.relative_gap());
    out += buf;
  }
  out += "note: " + note + "\n";
  return out;
}

}  // namespace wrapforge
