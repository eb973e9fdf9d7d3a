#include "texm/syntex/texture.h"

#include <array>
#include <cmath>

#include <fmt/format.h>

#include "texm/error.h"

namespace texm::syntex {
namespace {

struct TextureEntry {
  TextureId id;
  std::string_view name;
};

constexpr std::array<TextureEntry, 10> kTextures{{
    {TextureId::kFm, "fm"},
    {TextureId::kWind, "wind"},
    {TextureId::kWindchimes, "windchimes"},
    {TextureId::kChimes, "chimes"},
    {TextureId::kTapping, "tapping"},
    {TextureId::kBees, "bees"},
    {TextureId::kChirps, "chirps"},
    {TextureId::kFbnoise, "fbnoise"},
    {TextureId::kPops, "pops"},
    {TextureId::kApplause, "applause"},
}};

std::vector<ParamInfo> make_params(TextureId id) {
  switch (id) {
    case TextureId::kFm:
      return {{"cf_exp", "cf", 0.2, 0.8, 0.5},
              {"mf", "mf", 0.0, 20.0, 10.0},
              {"mI", "mi", 5.0, 20.0, 12.5}};
    case TextureId::kWind:
      return {{"strength", "strength", 0.0, 1.0, 0.5},
              {"gustiness", "gust", 0.0, 1.0, 0.5},
              {"howliness", "howl", 0.0, 1.0, 0.75}};
    case TextureId::kWindchimes:
    case TextureId::kChimes:
      return {{"strength", "strength", 0.2, 0.8, 0.5},
              {"chimeSize", "size", 0.2, 0.8, 0.5}};
    case TextureId::kTapping:
      return {{"rate_exp", "rate", 0.5, 2.0, 2.0},
              {"phase_rel", "relphase", 0.2, 0.4, 0.3}};
    case TextureId::kBees:
      // A default of 1 would sit outside [-2, 0]; -1 gives the ~200 Hz
      // average buzz the texture is described with.
      return {{"cf_exp", "cf", -2.0, 0.0, -1.0},
              {"busybodyFreqFactor", "busy", 0.0, 0.5, 0.25}};
    case TextureId::kChirps:
      return {{"rate_exp", "rate", 0.0, 2.0, 1.0},
              {"cf_exp", "cf", 0.0, 1.0, 0.5},
              {"irreg_exp", "irreg", 0.0, 1.0, 0.0}};
    case TextureId::kFbnoise:
      return {{"pitchedness", "pitchedness", 0.0, 1.0, 0.5, true},
              {"cf_exp", "cf", -1.0, 3.0, 0.0}};
    case TextureId::kPops:
      return {{"rate_exp", "rate", 3.0, 4.0, 4.0},
              {"cf", "cf", 540.0, 720.0, 630.0},
              {"irreg_exp", "irreg", 0.33, 0.66, 0.0}};
    case TextureId::kApplause:
      return {{"numClappers_exp", "clappers", 1.0, 3.0, 2.0},
              {"rate_exp", "rate", 1.0, 2.0, 2.0}};
  }
  fail(ErrorCode::kInvalidInput, "unknown texture id");
}

}  // namespace

std::string_view texture_name(TextureId id) {
  for (const auto& t : kTextures)
    if (t.id == id) return t.name;
  fail(ErrorCode::kInvalidInput, "unknown texture id");
}

std::optional<TextureId> parse_texture(std::string_view name) {
  for (const auto& t : kTextures)
    if (t.name == name) return t.id;
  return std::nullopt;
}

TextureId require_texture(std::string_view name) {
  if (auto id = parse_texture(name)) return *id;
  std::string valid;
  for (TextureId t : all_textures()) valid += (valid.empty() ? "" : ", ") + std::string(texture_name(t));
  fail(ErrorCode::kInvalidInput, fmt::format("unknown texture '{}' (valid: {})", name, valid));
}

const std::vector<TextureId>& all_textures() {
  static const std::vector<TextureId> ids = [] {
    std::vector<TextureId> v;
    for (const auto& t : kTextures) v.push_back(t.id);
    return v;
  }();
  return ids;
}

const std::vector<ParamInfo>& texture_params(TextureId id) {
  static const auto table = [] {
    std::array<std::vector<ParamInfo>, kTextures.size()> t;
    for (std::size_t i = 0; i < kTextures.size(); ++i) t[i] = make_params(kTextures[i].id);
    return t;
  }();
  return table.at(static_cast<std::size_t>(id));
}

const ParamInfo* find_param(TextureId id, std::string_view name_or_label) {
  for (const auto& p : texture_params(id))
    if (p.name == name_or_label || p.label == name_or_label) return &p;
  return nullptr;
}

std::vector<double> sweep_values(const ParamInfo& p, int n_values) {
  require(n_values >= 2, ErrorCode::kInvalidInput, "a sweep needs at least 2 values");
  const int steps = p.max_exclusive ? n_values : n_values - 1;
  std::vector<double> v(static_cast<std::size_t>(n_values));
  for (int i = 0; i < n_values; ++i) v[i] = p.min + (p.max - p.min) * i / steps;
  if (!p.max_exclusive) v.back() = p.max;
  return v;
}

double TextureSpec::param(std::string_view name) const {
  const ParamInfo* info = find_param(texture, name);
  require(info != nullptr, ErrorCode::kInvalidInput,
          fmt::format("texture {} has no parameter '{}'", texture_name(texture), name));
  if (auto it = params.find(info->name); it != params.end()) return it->second;
  return info->fallback;
}

void TextureSpec::validate() const {
  require(duration > 0 && std::isfinite(duration), ErrorCode::kInvalidInput,
          "duration must be positive");
  require(sample_rate > 0, ErrorCode::kInvalidInput, "sample rate must be positive");
  for (const auto& [name, value] : params) {
    const ParamInfo* info = find_param(texture, name);
    require(info != nullptr && info->name == name, ErrorCode::kInvalidInput,
            fmt::format("texture {} has no parameter '{}'", texture_name(texture), name));
    require(std::isfinite(value) && info->contains(value), ErrorCode::kInvalidInput,
            fmt::format("{}.{} = {} outside [{}, {}{}", texture_name(texture), name, value,
                        info->min, info->max, info->max_exclusive ? ")" : "]"));
  }
}

}  // namespace texm::syntex
