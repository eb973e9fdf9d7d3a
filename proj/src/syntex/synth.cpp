#include "texm/syntex/synth.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "texm/error.h"
#include "texm/signal/filters.h"
#include "texm/signal/simplex.h"
#include "texm/syntex/schedule.h"

namespace texm::syntex {
namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

std::size_t sample_count(const TextureSpec& spec) {
  const auto n = static_cast<std::size_t>(std::llround(spec.duration * spec.sample_rate));
  require(n > 0, ErrorCode::kInvalidInput, "duration shorter than one sample");
  return n;
}

double nyquist(int sample_rate) { return 0.5 * sample_rate; }

// Adds `event` into `out` starting at sample `at`, truncating at the end.
void mix_at(std::vector<double>& out, std::span<const double> event, std::size_t at,
            double gain = 1.0) {
  for (std::size_t i = 0; i < event.size() && at + i < out.size(); ++i)
    out[at + i] += gain * event[i];
}

std::size_t to_sample(double t, int sample_rate) {
  return static_cast<std::size_t>(std::llround(t * sample_rate));
}

// Simplex noise that tolerates frequency 0 (a constant field value).
std::vector<double> simplex_track(double frequency, double duration, int sample_rate,
                                  std::size_t n, SeededRng& rng) {
  std::vector<double> s;
  if (frequency > 0) {
    s = simplex_noise_1d(frequency, duration, sample_rate, rng);
  } else {
    GradientNoise1d field(rng.next_u64());
    s.assign(n, field(rng.uniform(0.0, 1024.0)));
  }
  s.resize(n, s.empty() ? 0.0 : s.back());
  return s;
}

std::vector<double> uniform_noise(std::size_t n, SeededRng& rng) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

Rendering render_fm(const TextureSpec& spec, SeededRng& rng) {
  const double cf = fm_carrier(spec.param("cf_exp"));
  // Versions differ only by where along the (deterministic) waveform they start.
  const double t0 = rng.uniform(0.0, 10.0);
  return {fm_signal(cf, spec.param("mf"), spec.param("mI"), t0, sample_count(spec),
                    spec.sample_rate),
          {}};
}

std::vector<double> wind_signal(double strength, double gustiness, double howliness,
                                const TextureSpec& spec, const SynthConfig& cfg,
                                SeededRng& rng) {
  const std::size_t n = sample_count(spec);
  const int sr = spec.sample_rate;
  std::vector<double> noise(n);
  for (auto& v : noise) v = rng.normal();
  const auto source = lowpass_n(noise, cfg.wind_lowpass_cutoff, cfg.wind_lowpass_order, sr);
  const auto s = simplex_track(wind_simplex_rate(gustiness), spec.duration, sr, n, rng);

  const double avg = wind_average_cf(strength);
  const double q = wind_q(howliness);
  const double cf_limit = 0.45 * sr;
  Biquad bp;
  std::vector<double> out(n);
  const auto block = static_cast<std::size_t>(cfg.wind_update_block);
  for (std::size_t b = 0; b < n; b += block) {
    const std::size_t mid = std::min(n - 1, b + block / 2);
    const double cf = std::min(cf_limit, avg * std::exp2(0.45 * s[mid]));
    bp.set(design_bandpass(cf, q, sr));
    for (std::size_t i = b; i < std::min(n, b + block); ++i)
      out[i] = bp.process(source[i]) * 0.5 * (1.0 + s[i]);
  }
  return out;
}

Rendering render_wind(const TextureSpec& spec, const SynthConfig& cfg, SeededRng& rng) {
  return {wind_signal(spec.param("strength"), spec.param("gustiness"), spec.param("howliness"),
                      spec, cfg, rng),
          {}};
}

Rendering render_chimes(const TextureSpec& spec, const SynthConfig& cfg, SeededRng& rng,
                        bool wind_bed) {
  const std::size_t n = sample_count(spec);
  const int sr = spec.sample_rate;
  const double strength = spec.param("strength");
  const double scale = chime_scale_factor(spec.param("chimeSize"));
  const double rate = cfg.chime_rate_per_strength * strength;

  Rendering r;
  r.samples.assign(n, 0.0);
  for (std::size_t c = 0; c < cfg.chime_tunings.size(); ++c) {
    SeededRng chime_rng(derive_seed(rng.next_u64(), c));
    const auto s = simplex_track(rate, spec.duration, sr, n, chime_rng);
    for (std::size_t i = 1; i < n; ++i) {
      if ((s[i - 1] < 0) == (s[i] < 0)) continue;
      // Derivative with respect to the noise lattice coordinate.
      const double slope = std::abs(s[i] - s[i - 1]) * sr / rate;
      const auto strike = chime_strike(static_cast<int>(c), slope, scale,
                                       static_cast<double>(n - i) / sr, sr, cfg);
      mix_at(r.samples, strike, i);
      r.onsets.push_back(static_cast<double>(i) / sr);
    }
  }
  std::sort(r.onsets.begin(), r.onsets.end());

  if (wind_bed) {
    auto wind = wind_signal(strength, 0.5, 0.75, spec, cfg, rng);
    double peak = 0;
    for (double v : wind) peak = std::max(peak, std::abs(v));
    const double gain = peak > 0 ? cfg.chime_wind_bed_level / peak : 0.0;
    for (std::size_t i = 0; i < n; ++i) r.samples[i] += gain * wind[i];
  }
  return r;
}

Rendering render_tapping(const TextureSpec& spec, const SynthConfig& cfg, SeededRng& rng) {
  const std::size_t n = sample_count(spec);
  const int sr = spec.sample_rate;
  Rendering r;
  r.onsets = tapping_onsets(spec.param("rate_exp"), spec.param("phase_rel"), spec.duration);
  std::vector<double> excitation(n, 0.0);
  const auto burst = std::max<std::size_t>(1, to_sample(cfg.tap_duration, sr));
  for (double t : r.onsets) mix_at(excitation, uniform_noise(burst, rng), to_sample(t, sr));
  r.samples = biquad_bandpass(excitation, cfg.tap_center, cfg.tap_q, sr);
  return r;
}

double triangle(double phase, double rise) {
  return phase < rise ? -1.0 + 2.0 * phase / rise : 1.0 - 2.0 * (phase - rise) / (1.0 - rise);
}

Rendering render_bees(const TextureSpec& spec, const SynthConfig& cfg, SeededRng& rng) {
  const std::size_t n = sample_count(spec);
  const int sr = spec.sample_rate;
  const double cf_exp = spec.param("cf_exp");
  const double busy = spec.param("busybodyFreqFactor");
  const double span = cfg.bee_max_distance - cfg.bee_min_distance;
  const double centre = cfg.bee_min_distance + 0.5 * span;

  std::vector<double> dry(n, 0.0);
  for (int v = 0; v < cfg.bee_voices; ++v) {
    SeededRng voice_rng(derive_seed(rng.next_u64(), static_cast<std::uint64_t>(v)));
    const double f0 = 440.0 * std::exp2(voice_rng.normal(cf_exp, cfg.bee_cf_sd));
    const auto micro = simplex_track(cfg.bee_micro_rate, spec.duration, sr, n, voice_rng);
    std::vector<double> distance(n, cfg.bee_fixed_distance.value_or(centre));
    if (!cfg.bee_fixed_distance) {
      const auto motion = simplex_track(cfg.bee_motion_rate, spec.duration, sr, n, voice_rng);
      for (std::size_t i = 0; i < n; ++i) distance[i] = centre + 0.5 * span * motion[i];
    }
    double phase = voice_rng.uniform();
    for (std::size_t i = 0; i < n; ++i) {
      // Radial velocity, positive when receding.
      const double velocity =
          i == 0 ? 0.0 : (distance[i] - distance[i - 1]) * sr;
      const double doppler = cfg.speed_of_sound / (cfg.speed_of_sound + velocity);
      const double f = f0 * std::exp2(busy * micro[i]) * doppler;
      dry[i] += bee_distance_gain(distance[i], cfg) * triangle(phase, cfg.bee_rise_fraction);
      phase += f / sr;
      phase -= std::floor(phase);
    }
  }

  Rendering r;
  r.samples = dry;
  for (double formant : cfg.bee_formants) {
    if (formant >= nyquist(sr)) continue;
    const auto shaped = biquad_bandpass(dry, formant, cfg.bee_formant_q, sr);
    for (std::size_t i = 0; i < n; ++i) r.samples[i] += shaped[i];
  }
  return r;
}

Rendering render_chirps(const TextureSpec& spec, const SynthConfig& cfg, SeededRng& rng) {
  const std::size_t n = sample_count(spec);
  const int sr = spec.sample_rate;
  const double eps = std::exp2(spec.param("rate_exp"));
  SeededRng schedule_rng(rng.next_u64());
  const auto schedule = schedule_events(eps, spec.param("irreg_exp"), spec.duration, schedule_rng);
  Rendering r{std::vector<double>(n, 0.0), schedule.onsets};
  for (double t : schedule.onsets) {
    const double centre = draw_chirp_center(spec.param("cf_exp"), rng, cfg);
    mix_at(r.samples, chirp_tone(centre, sr, cfg), to_sample(t, sr));
  }
  return r;
}

Rendering render_fbnoise(const TextureSpec& spec, SeededRng& rng) {
  const auto x = uniform_noise(sample_count(spec), rng);
  return {feedback_comb(x, fbnoise_delay(spec.param("cf_exp"), spec.sample_rate),
                        fbnoise_alpha(spec.param("pitchedness"))),
          {}};
}

Rendering render_pops(const TextureSpec& spec, const SynthConfig& cfg, SeededRng& rng) {
  const std::size_t n = sample_count(spec);
  const int sr = spec.sample_rate;
  SeededRng schedule_rng(rng.next_u64());
  const auto schedule = schedule_events(pops_rate(spec.param("rate_exp")),
                                        spec.param("irreg_exp"), spec.duration, schedule_rng);
  Rendering r{std::vector<double>(n, 0.0), schedule.onsets};
  for (double t : schedule.onsets) {
    const double centre = draw_pop_center(spec.param("cf"), rng);
    mix_at(r.samples, pop_event(centre, rng, sr, cfg), to_sample(t, sr));
  }
  return r;
}

Rendering render_applause(const TextureSpec& spec, const SynthConfig& cfg, SeededRng& rng) {
  const std::size_t n = sample_count(spec);
  const int sr = spec.sample_rate;
  const int clappers = applause_clappers(spec.param("numClappers_exp"));
  const double eps = std::exp2(spec.param("rate_exp"));
  const auto tail = to_sample(cfg.clap_tail, sr);

  Rendering r;
  std::vector<double> dry(n, 0.0);
  for (int c = 0; c < clappers; ++c) {
    SeededRng clapper(derive_seed(rng.next_u64(), static_cast<std::uint64_t>(c)));
    // Random phase per clapper so sequences do not line up; the schedule
    // runs one period longer so the shifted sequence still covers the clip.
    const double offset = clapper.uniform(0.0, 1.0 / eps);
    const auto schedule =
        schedule_events(eps, cfg.clap_irreg_exp, spec.duration + 1.0 / eps, clapper);
    for (double t : schedule.onsets) {
      const double onset = t - offset;
      if (onset < 0 || onset >= spec.duration) continue;
      auto burst = clap_excitation(clapper, cfg);
      burst.resize(burst.size() + tail, 0.0);
      const double centre = clapper.uniform(cfg.clap_low_hz, cfg.clap_high_hz);
      mix_at(dry, biquad_bandpass(burst, centre, cfg.clap_q, sr), to_sample(onset, sr));
      r.onsets.push_back(onset);
    }
  }
  std::sort(r.onsets.begin(), r.onsets.end());
  r.samples = cfg.reverb_wet > 0 ? schroeder_reverb(dry, sr, cfg) : dry;
  return r;
}

AudioClip synth_checked(TextureId expected, const TextureSpec& spec, const SynthConfig& cfg) {
  require(spec.texture == expected, ErrorCode::kInvalidInput,
          fmt::format("expected a {} spec, got {}", texture_name(expected),
                      texture_name(spec.texture)));
  return synthesize(spec, cfg);
}

}  // namespace

Rendering render(const TextureSpec& spec, const SynthConfig& cfg) {
  spec.validate();
  SeededRng rng(spec.seed);
  switch (spec.texture) {
    case TextureId::kFm: return render_fm(spec, rng);
    case TextureId::kWind: return render_wind(spec, cfg, rng);
    case TextureId::kWindchimes: return render_chimes(spec, cfg, rng, true);
    case TextureId::kChimes: return render_chimes(spec, cfg, rng, false);
    case TextureId::kTapping: return render_tapping(spec, cfg, rng);
    case TextureId::kBees: return render_bees(spec, cfg, rng);
    case TextureId::kChirps: return render_chirps(spec, cfg, rng);
    case TextureId::kFbnoise: return render_fbnoise(spec, rng);
    case TextureId::kPops: return render_pops(spec, cfg, rng);
    case TextureId::kApplause: return render_applause(spec, cfg, rng);
  }
  fail(ErrorCode::kInvalidInput, "unknown texture id");
}

AudioClip normalize_peak(std::vector<double> samples, int sample_rate, double peak_level) {
  double peak = 0;
  for (double v : samples) peak = std::max(peak, std::abs(v));
  const double gain = peak > 0 ? peak_level / peak : 0.0;
  for (auto& v : samples) v = static_cast<float>(v * gain);
  return AudioClip(std::move(samples), sample_rate);
}

AudioClip synthesize(const TextureSpec& spec, const SynthConfig& cfg) {
  return normalize_peak(render(spec, cfg).samples, spec.sample_rate, cfg.peak_level);
}

AudioClip synth_fm(const TextureSpec& s, const SynthConfig& c) {
  return synth_checked(TextureId::kFm, s, c);
}
AudioClip synth_wind(const TextureSpec& s, const SynthConfig& c) {
  return synth_checked(TextureId::kWind, s, c);
}
AudioClip synth_windchimes(const TextureSpec& s, const SynthConfig& c) {
  require(s.texture == TextureId::kWindchimes || s.texture == TextureId::kChimes,
          ErrorCode::kInvalidInput, "expected a windchimes or chimes spec");
  return synthesize(s, c);
}
AudioClip synth_tapping(const TextureSpec& s, const SynthConfig& c) {
  return synth_checked(TextureId::kTapping, s, c);
}
AudioClip synth_bees(const TextureSpec& s, const SynthConfig& c) {
  return synth_checked(TextureId::kBees, s, c);
}
AudioClip synth_chirps(const TextureSpec& s, const SynthConfig& c) {
  return synth_checked(TextureId::kChirps, s, c);
}
AudioClip synth_fbnoise(const TextureSpec& s, const SynthConfig& c) {
  return synth_checked(TextureId::kFbnoise, s, c);
}
AudioClip synth_pops(const TextureSpec& s, const SynthConfig& c) {
  return synth_checked(TextureId::kPops, s, c);
}
AudioClip synth_applause(const TextureSpec& s, const SynthConfig& c) {
  return synth_checked(TextureId::kApplause, s, c);
}

std::vector<double> fm_signal(double cf, double mf, double mod_index, double time_offset,
                              std::size_t n, int sample_rate) {
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = time_offset + static_cast<double>(i) / sample_rate;
    y[i] = std::sin(kTwoPi * cf * t + mod_index * std::sin(kTwoPi * mf * t));
  }
  return y;
}

double fm_carrier(double cf_exp) { return 330.0 * std::exp2(cf_exp); }

double wind_average_cf(double strength) { return 180.0 + 440.0 * strength; }
double wind_q(double howliness) { return 0.5 + 40.0 * howliness; }
double wind_simplex_rate(double gustiness) { return 3.0 * gustiness; }

std::vector<double> chime_strike(int chime, double amplitude, double scale_factor,
                                 double seconds, int sample_rate, const SynthConfig& cfg) {
  require(chime >= 0 && static_cast<std::size_t>(chime) < cfg.chime_tunings.size(),
          ErrorCode::kInvalidInput, "chime index out of range");
  const auto n = static_cast<std::size_t>(std::max(0.0, seconds) * sample_rate);
  std::vector<double> out(n, 0.0);
  const double base = cfg.chime_base_hz * cfg.chime_tunings[chime] * scale_factor;
  for (std::size_t p = 0; p < cfg.chime_ratios.size(); ++p) {
    const double f = base * cfg.chime_ratios[p];
    if (f >= nyquist(sample_rate)) continue;  // partials above Nyquist are dropped
    const double w = kTwoPi * f / sample_rate;
    const double decay = std::exp(-1.0 / (cfg.chime_decays[p] * sample_rate));
    double env = amplitude * cfg.chime_amplitudes[p];
    for (std::size_t i = 0; i < n; ++i, env *= decay) out[i] += env * std::sin(w * i);
  }
  return out;
}

double chime_scale_factor(double chime_size) { return 4.0 * chime_size; }

double tapping_cycle_rate(double rate_exp) { return std::exp2(rate_exp); }

std::vector<double> tapping_onsets(double rate_exp, double phase_rel, double duration) {
  const double period = 1.0 / tapping_cycle_rate(rate_exp);
  std::vector<double> onsets;
  for (long k = 0; k * period < duration; ++k) {
    onsets.push_back(k * period);
    if ((k + phase_rel) * period < duration) onsets.push_back((k + phase_rel) * period);
  }
  return onsets;
}

double bee_mean_frequency(double cf_exp) { return 440.0 * std::exp2(cf_exp); }

double bee_distance_gain(double distance, const SynthConfig& cfg) {
  require(distance > 0, ErrorCode::kInvalidInput, "distance must be positive");
  const double r = cfg.bee_min_distance / distance;
  return r * r;
}

double chirp_mean_frequency(double cf_exp) { return 440.0 * std::exp2(cf_exp); }

double draw_chirp_center(double cf_exp, SeededRng& rng, const SynthConfig& cfg) {
  return 440.0 * std::exp2(cf_exp + cfg.chirp_cf_sd_octaves * rng.normal());
}

std::vector<double> chirp_tone(double center, int sample_rate, const SynthConfig& cfg) {
  const auto n = std::max<std::size_t>(2, to_sample(cfg.chirp_duration, sample_rate));
  const double half = 0.5 * cfg.chirp_excursion_octaves;
  std::vector<double> out(n, 0.0);
  std::vector<double> phase(cfg.chirp_harmonics.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / (n - 1);  // 0..1 across the chirp
    const double f = center * std::exp2(-half + 2 * half * x);
    const double env = 0.5 - 0.5 * std::cos(kTwoPi * x);
    for (std::size_t h = 0; h < phase.size(); ++h) {
      const double fh = f * cfg.chirp_harmonics[h];
      if (fh >= nyquist(sample_rate)) continue;
      out[i] += env * cfg.chirp_harmonic_amplitudes[h] * std::sin(phase[h]);
      phase[h] += kTwoPi * fh / sample_rate;
    }
  }
  return out;
}

int fbnoise_delay(double cf_exp, int sample_rate) {
  const long k = std::lround(sample_rate / (220.0 * std::exp2(cf_exp)));
  require(k >= 1, ErrorCode::kInvalidInput,
          fmt::format("comb delay rounds to {} samples at {} Hz", k, sample_rate));
  return static_cast<int>(k);
}

double fbnoise_alpha(double pitchedness) { return 1.0 - 1.0 / std::exp2(4.0 * pitchedness); }

std::vector<double> feedback_comb(std::span<const double> x, int delay, double alpha) {
  require(delay >= 1, ErrorCode::kInvalidInput, "comb delay must be >= 1");
  std::vector<double> y(x.size());
  const auto k = static_cast<std::size_t>(delay);
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = (1 - alpha) * x[i] + (i >= k ? alpha * y[i - k] : 0.0);
  return y;
}

double pops_rate(double rate_exp) { return std::exp2(rate_exp); }

double draw_pop_center(double cf, SeededRng& rng) {
  return cf * std::exp2(rng.normal() / 12.0);
}

std::vector<double> pop_event(double center, SeededRng& rng, int sample_rate,
                              const SynthConfig& cfg) {
  std::vector<double> x(std::max<std::size_t>(3, to_sample(cfg.pop_tail, sample_rate)), 0.0);
  for (int i = 0; i < 3; ++i) x[i] = rng.uniform(-1.0, 1.0);
  return biquad_bandpass(x, center, cfg.pop_q, sample_rate);
}

int applause_clappers(double num_clappers_exp) {
  return std::max(1, static_cast<int>(std::lround(std::exp2(num_clappers_exp))));
}

std::vector<double> clap_excitation(SeededRng& rng, const SynthConfig& cfg) {
  return uniform_noise(static_cast<std::size_t>(cfg.clap_burst_samples), rng);
}

std::vector<double> schroeder_reverb(std::span<const double> dry, int sample_rate,
                                     const SynthConfig& cfg) {
  const std::size_t n = dry.size();
  std::vector<double> wet(n, 0.0);
  for (double ms : cfg.reverb_comb_ms) {
    const auto d = std::max<std::size_t>(1, to_sample(ms / 1000.0, sample_rate));
    // Feedback giving 60 dB of decay after rt60 seconds.
    const double g = std::pow(10.0, -3.0 * (ms / 1000.0) / cfg.reverb_rt60);
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) y[i] = dry[i] + (i >= d ? g * y[i - d] : 0.0);
    for (std::size_t i = 0; i < n; ++i) wet[i] += y[i] / cfg.reverb_comb_ms.size();
  }
  for (double ms : cfg.reverb_allpass_ms) {
    const auto d = std::max<std::size_t>(1, to_sample(ms / 1000.0, sample_rate));
    const double g = cfg.reverb_allpass_gain;
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double xd = i >= d ? wet[i - d] : 0.0;
      const double yd = i >= d ? y[i - d] : 0.0;
      y[i] = -g * wet[i] + xd + g * yd;
    }
    wet = std::move(y);
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = (1 - cfg.reverb_wet) * dry[i] + cfg.reverb_wet * wet[i];
  return out;
}

}  // namespace texm::syntex
