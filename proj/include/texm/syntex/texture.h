#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "texm/signal/audio_clip.h"

namespace texm::syntex {

enum class TextureId {
  kFm,
  kWind,
  kWindchimes,
  kChimes,
  kTapping,
  kBees,
  kChirps,
  kFbnoise,
  kPops,
  kApplause,
};

std::string_view texture_name(TextureId id);
std::optional<TextureId> parse_texture(std::string_view name);
// Throws kInvalidInput listing the valid ids.
TextureId require_texture(std::string_view name);
const std::vector<TextureId>& all_textures();

// One control parameter of a texture. `label` is the short name used in
// corpus directory names (fm-cf, pops-rate, ...).
struct ParamInfo {
  std::string name;
  std::string label;
  double min = 0;
  double max = 0;
  double fallback = 0;
  bool max_exclusive = false;

  bool contains(double v) const {
    return v >= min && (max_exclusive ? v < max : v <= max);
  }
};

const std::vector<ParamInfo>& texture_params(TextureId id);
// Accepts either the canonical name or the short label.
const ParamInfo* find_param(TextureId id, std::string_view name_or_label);

// Linearly spaced sweep values. Half-open ranges stop one step short of max.
std::vector<double> sweep_values(const ParamInfo& p, int n_values);

struct TextureSpec {
  TextureId texture = TextureId::kFm;
  std::map<std::string, double, std::less<>> params;
  double duration = 2.0;
  int sample_rate = kDefaultSampleRate;
  std::uint64_t seed = 0;

  // Explicit value, else the texture's fixed default.
  double param(std::string_view name) const;
  // Throws kInvalidInput on unknown names or out-of-range values.
  void validate() const;
};

}  // namespace texm::syntex
