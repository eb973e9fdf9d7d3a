#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace texm::syntex {

// Constants the synthesis formulas leave open. Every field has an embedded
// default and can be overridden from a JSON config file.
struct SynthConfig {
  double peak_level = 0.9;

  // wind
  int wind_lowpass_order = 5;
  double wind_lowpass_cutoff = 400.0;
  int wind_update_block = 64;

  // windchimes / chimes: modal table for one chime, relative to base_hz
  double chime_base_hz = 523.0;
  std::vector<double> chime_ratios{1.0, 2.76, 5.40, 8.93, 13.34};
  std::vector<double> chime_amplitudes{1.0, 0.6, 0.4, 0.25, 0.15};
  std::vector<double> chime_decays{1.2, 0.9, 0.7, 0.5, 0.4};
  // Pitch of each of the five chimes relative to base_hz.
  std::vector<double> chime_tunings{1.0, 9.0 / 8.0, 5.0 / 4.0, 3.0 / 2.0, 5.0 / 3.0};
  double chime_rate_per_strength = 3.0;
  double chime_wind_bed_level = 0.2;

  // tapping
  double tap_duration = 0.002;
  double tap_center = 1200.0;
  double tap_q = 8.0;

  // bees
  int bee_voices = 4;
  double bee_cf_sd = 0.25;
  double bee_rise_fraction = 0.3;
  double bee_micro_rate = 14.0;
  double bee_motion_rate = 2.0;
  double bee_min_distance = 2.0;
  double bee_max_distance = 10.0;
  std::optional<double> bee_fixed_distance;
  std::vector<double> bee_formants{500.0, 1500.0};
  double bee_formant_q = 4.0;
  double speed_of_sound = 343.0;

  // chirps
  double chirp_duration = 0.08;
  double chirp_excursion_octaves = 0.5;
  double chirp_cf_sd_octaves = 1.0 / 12.0;
  std::vector<double> chirp_harmonics{1.0, 2.0};
  std::vector<double> chirp_harmonic_amplitudes{1.0, 0.5};

  // pops
  double pop_q = 30.0;
  double pop_tail = 0.3;

  // applause
  int clap_burst_samples = 45;
  double clap_low_hz = 800.0;
  double clap_high_hz = 1400.0;
  double clap_q = 5.0;
  double clap_irreg_exp = 0.25;
  double clap_tail = 0.1;
  std::vector<double> reverb_comb_ms{29.7, 37.1, 41.1, 43.7};
  std::vector<double> reverb_allpass_ms{5.0, 1.7};
  double reverb_allpass_gain = 0.7;
  double reverb_rt60 = 0.8;
  double reverb_wet = 0.3;

  bool operator==(const SynthConfig&) const = default;
};

void to_json(nlohmann::json& j, const SynthConfig& c);
// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, SynthConfig& c);
SynthConfig load_synth_config(const std::filesystem::path& path);

}  // namespace texm::syntex
