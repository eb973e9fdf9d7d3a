#include "texm/syntex/synth_config.h"

#include <fstream>

#include <nlohmann/json.hpp>

#include "texm/error.h"

namespace texm::syntex {
namespace {

// One table drives both directions so the two can never drift apart.
template <typename Visitor>
void visit_fields(SynthConfig& c, Visitor&& v) {
  v("peak_level", c.peak_level);
  v("wind_lowpass_order", c.wind_lowpass_order);
  v("wind_lowpass_cutoff", c.wind_lowpass_cutoff);
  v("wind_update_block", c.wind_update_block);
  v("chime_base_hz", c.chime_base_hz);
  v("chime_ratios", c.chime_ratios);
  v("chime_amplitudes", c.chime_amplitudes);
  v("chime_decays", c.chime_decays);
  v("chime_tunings", c.chime_tunings);
  v("chime_rate_per_strength", c.chime_rate_per_strength);
  v("chime_wind_bed_level", c.chime_wind_bed_level);
  v("tap_duration", c.tap_duration);
  v("tap_center", c.tap_center);
  v("tap_q", c.tap_q);
  v("bee_voices", c.bee_voices);
  v("bee_cf_sd", c.bee_cf_sd);
  v("bee_rise_fraction", c.bee_rise_fraction);
  v("bee_micro_rate", c.bee_micro_rate);
  v("bee_motion_rate", c.bee_motion_rate);
  v("bee_min_distance", c.bee_min_distance);
  v("bee_max_distance", c.bee_max_distance);
  v("bee_fixed_distance", c.bee_fixed_distance);
  v("bee_formants", c.bee_formants);
  v("bee_formant_q", c.bee_formant_q);
  v("speed_of_sound", c.speed_of_sound);
  v("chirp_duration", c.chirp_duration);
  v("chirp_excursion_octaves", c.chirp_excursion_octaves);
  v("chirp_cf_sd_octaves", c.chirp_cf_sd_octaves);
  v("chirp_harmonics", c.chirp_harmonics);
  v("chirp_harmonic_amplitudes", c.chirp_harmonic_amplitudes);
  v("pop_q", c.pop_q);
  v("pop_tail", c.pop_tail);
  v("clap_burst_samples", c.clap_burst_samples);
  v("clap_low_hz", c.clap_low_hz);
  v("clap_high_hz", c.clap_high_hz);
  v("clap_q", c.clap_q);
  v("clap_irreg_exp", c.clap_irreg_exp);
  v("clap_tail", c.clap_tail);
  v("reverb_comb_ms", c.reverb_comb_ms);
  v("reverb_allpass_ms", c.reverb_allpass_ms);
  v("reverb_allpass_gain", c.reverb_allpass_gain);
  v("reverb_rt60", c.reverb_rt60);
  v("reverb_wet", c.reverb_wet);
}

template <typename T>
void write_field(nlohmann::json& j, const char* key, const std::optional<T>& value) {
  j[key] = value ? nlohmann::json(*value) : nlohmann::json(nullptr);
}
template <typename T>
void write_field(nlohmann::json& j, const char* key, const T& value) {
  j[key] = value;
}

template <typename T>
void read_field(const nlohmann::json& j, std::optional<T>& out) {
  if (j.is_null()) out.reset();
  else out = j.get<T>();
}
template <typename T>
void read_field(const nlohmann::json& j, T& out) {
  out = j.get<T>();
}

void check(const SynthConfig& c) {
  auto ok = [](bool cond, const char* what) {
    require(cond, ErrorCode::kInvalidInput, std::string("synth config: ") + what);
  };
  const auto n = c.chime_ratios.size();
  ok(n > 0 && c.chime_amplitudes.size() == n && c.chime_decays.size() == n,
     "chime modal table columns must have equal, nonzero length");
  ok(!c.chime_tunings.empty(), "chime_tunings must not be empty");
  ok(c.chirp_harmonics.size() == c.chirp_harmonic_amplitudes.size(),
     "chirp harmonic lists must have equal length");
  ok(c.peak_level > 0 && c.peak_level <= 1, "peak_level must lie in (0, 1]");
  ok(c.wind_update_block >= 1 && c.wind_lowpass_order >= 1, "wind block/order must be >= 1");
  ok(c.bee_voices >= 1, "bee_voices must be >= 1");
  ok(c.clap_burst_samples >= 1, "clap_burst_samples must be >= 1");
  ok(c.clap_low_hz > 0 && c.clap_high_hz >= c.clap_low_hz, "clap band must be ordered");
  ok(c.reverb_wet >= 0 && c.reverb_wet <= 1, "reverb_wet must lie in [0, 1]");
  ok(c.reverb_rt60 > 0, "reverb_rt60 must be positive");
  ok(c.bee_min_distance > 0 && c.bee_max_distance >= c.bee_min_distance,
     "bee distances must be positive and ordered");
}

}  // namespace

void to_json(nlohmann::json& j, const SynthConfig& c) {
  j = nlohmann::json::object();
  SynthConfig copy = c;
  visit_fields(copy, [&](const char* key, const auto& value) { write_field(j, key, value); });
}

void from_json(const nlohmann::json& j, SynthConfig& c) {
  require(j.is_object(), ErrorCode::kParse, "synth config must be a JSON object");
  std::size_t matched = 0;
  try {
    visit_fields(c, [&](const char* key, auto& field) {
      if (auto it = j.find(key); it != j.end()) {
        read_field(*it, field);
        ++matched;
      }
    });
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, std::string("synth config: ") + e.what());
  }
  if (matched != j.size()) {
    for (const auto& [key, _] : j.items()) {
      bool known = false;
      visit_fields(c, [&](const char* k, auto&) { known = known || key == k; });
      require(known, ErrorCode::kParse, "synth config: unknown key '" + key + "'");
    }
  }
  check(c);
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open synth config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  SynthConfig c;
  from_json(j, c);
  return c;
}

}  // namespace texm::syntex
