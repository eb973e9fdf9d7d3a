#pragma once

#include <span>
#include <vector>

#include "texm/signal/audio_clip.h"
#include "texm/signal/rng.h"
#include "texm/syntex/synth_config.h"
#include "texm/syntex/texture.h"

namespace texm::syntex {

// Un-normalized render plus the event onsets (seconds) that produced it.
struct Rendering {
  std::vector<double> samples;
  std::vector<double> onsets;
};

Rendering render(const TextureSpec& spec, const SynthConfig& cfg = {});

// render() followed by peak normalization to cfg.peak_level and rounding to
// float precision, so the clip survives a float-32 WAV round trip unchanged.
AudioClip synthesize(const TextureSpec& spec, const SynthConfig& cfg = {});
AudioClip normalize_peak(std::vector<double> samples, int sample_rate, double peak_level);

// Per-texture entry points; each checks that spec.texture matches.
AudioClip synth_fm(const TextureSpec& spec, const SynthConfig& cfg = {});
AudioClip synth_wind(const TextureSpec& spec, const SynthConfig& cfg = {});
AudioClip synth_windchimes(const TextureSpec& spec, const SynthConfig& cfg = {});
AudioClip synth_tapping(const TextureSpec& spec, const SynthConfig& cfg = {});
AudioClip synth_bees(const TextureSpec& spec, const SynthConfig& cfg = {});
AudioClip synth_chirps(const TextureSpec& spec, const SynthConfig& cfg = {});
AudioClip synth_fbnoise(const TextureSpec& spec, const SynthConfig& cfg = {});
AudioClip synth_pops(const TextureSpec& spec, const SynthConfig& cfg = {});
AudioClip synth_applause(const TextureSpec& spec, const SynthConfig& cfg = {});

// Building blocks, exposed for measurement.

// sin(2 pi cf (t + t0) + mI sin(2 pi mf (t + t0)))
std::vector<double> fm_signal(double cf, double mf, double mod_index, double time_offset,
                              std::size_t n, int sample_rate);
double fm_carrier(double cf_exp);

double wind_average_cf(double strength);
double wind_q(double howliness);
double wind_simplex_rate(double gustiness);

// Sum of decaying partials for one strike of chime `chime` (0..4).
std::vector<double> chime_strike(int chime, double amplitude, double scale_factor,
                                 double seconds, int sample_rate, const SynthConfig& cfg);
double chime_scale_factor(double chime_size);

double tapping_cycle_rate(double rate_exp);
std::vector<double> tapping_onsets(double rate_exp, double phase_rel, double duration);

double bee_mean_frequency(double cf_exp);
double bee_distance_gain(double distance, const SynthConfig& cfg);

double chirp_mean_frequency(double cf_exp);
double draw_chirp_center(double cf_exp, SeededRng& rng, const SynthConfig& cfg);
std::vector<double> chirp_tone(double center, int sample_rate, const SynthConfig& cfg);

int fbnoise_delay(double cf_exp, int sample_rate);
double fbnoise_alpha(double pitchedness);
// y[n] = (1 - alpha) x[n] + alpha y[n - K]
std::vector<double> feedback_comb(std::span<const double> x, int delay, double alpha);

double pops_rate(double rate_exp);
double draw_pop_center(double cf, SeededRng& rng);
std::vector<double> pop_event(double center, SeededRng& rng, int sample_rate,
                              const SynthConfig& cfg);

int applause_clappers(double num_clappers_exp);
std::vector<double> clap_excitation(SeededRng& rng, const SynthConfig& cfg);
std::vector<double> schroeder_reverb(std::span<const double> dry, int sample_rate,
                                     const SynthConfig& cfg);

}  // namespace texm::syntex
