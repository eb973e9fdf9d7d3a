#include "texm/cochlear/cochlear.h"

#include <cmath>
#include <fstream>
#include <numbers>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "texm/error.h"
#include "texm/signal/fft.h"
#include "texm/signal/hilbert.h"
#include "texm/signal/stats.h"

namespace texm::cochlear {
namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[i] = lo * std::pow(hi / lo, n == 1 ? 0.0 : double(i) / (n - 1));
  return v;
}

double sample_variance(std::span<const double> x, double m) {
  double acc = 0;
  for (double v : x) acc += (v - m) * (v - m);
  return acc / static_cast<double>(x.size());
}

// A signal is treated as constant when its spread is negligible next to
// its level; the absolute floor catches all-zero input.
bool is_constant(double var, double m) {
  return var <= 1e-24 * std::max(1.0, m * m) || !(var > 1e-300);
}

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index c) {
  return {m.col(c).data(), m.col(c).data() + m.rows()};
}

Eigen::VectorXd flat(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

std::vector<double> to_vec(const Eigen::MatrixXd& m) {
  return {m.data(), m.data() + m.size()};
}

Eigen::MatrixXd from_json_matrix(const nlohmann::json& j, const char* key, Eigen::Index rows,
                                 Eigen::Index cols) {
  const auto v = j.at(key).get<std::vector<double>>();
  require(static_cast<Eigen::Index>(v.size()) == rows * cols, ErrorCode::kParse,
          fmt::format("stats field {} has {} values, expected {}", key, v.size(), rows * cols));
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

}  // namespace

void CochlearConfig::validate(int sample_rate) const {
  require(n_cochlear_filters == kCochlearFilters && n_modulation_filters == kModulationFilters,
          ErrorCode::kInvalidInput, "the filter counts are fixed at 36 cochlear and 20 modulation");
  require(compression_exponent == 0.3, ErrorCode::kInvalidInput,
          "the compression exponent is fixed at 0.3");
  require(cochlear_low_hz > 0 && cochlear_high_hz > cochlear_low_hz &&
              cochlear_high_hz <= 0.5 * sample_rate,
          ErrorCode::kInvalidInput, "cochlear range must lie inside (0, Nyquist]");
  require(envelope_rate > 0 && std::fmod(sample_rate, envelope_rate) == 0,
          ErrorCode::kInvalidInput,
          fmt::format("envelope rate {} must divide the sample rate {}", envelope_rate,
                      sample_rate));
  require(modulation_low_hz > 0 && modulation_high_hz > modulation_low_hz &&
              modulation_high_hz <= 0.5 * envelope_rate,
          ErrorCode::kInvalidInput, "modulation range must lie inside (0, envelope Nyquist]");
  require(modulation_q > 0, ErrorCode::kInvalidInput, "modulation Q must be positive");
}

double hz_to_erb_rate(double hz) { return 21.4 * std::log10(1.0 + 0.00437 * hz); }
double erb_rate_to_hz(double erb_rate) {
  return (std::pow(10.0, erb_rate / 21.4) - 1.0) / 0.00437;
}
double erb_bandwidth(double hz) { return 24.7 * (0.00437 * hz + 1.0); }

std::vector<double> cochlear_centers(const CochlearConfig& cfg) {
  const double lo = hz_to_erb_rate(cfg.cochlear_low_hz);
  const double hi = hz_to_erb_rate(cfg.cochlear_high_hz);
  const int n = cfg.n_cochlear_filters;
  std::vector<double> c(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) c[i] = erb_rate_to_hz(lo + (hi - lo) * (i + 1) / (n + 1));
  return c;
}

std::vector<double> modulation_centers(const CochlearConfig& cfg) {
  return log_spaced(cfg.modulation_low_hz, cfg.modulation_high_hz, cfg.n_modulation_filters);
}

Bands gammatone_decompose(const AudioClip& clip, const CochlearConfig& cfg) {
  const int sr = clip.sample_rate();
  cfg.validate(sr);
  require(clip.duration() >= cfg.min_duration, ErrorCode::kInvalidInput,
          fmt::format("clip of {:.3f} s is shorter than the {} s minimum", clip.duration(),
                      cfg.min_duration));
  // Frequency-domain realization: every band gets the magnitude response of
  // a 4th-order gammatone, |1 + j (f - fc) / b|^-4 with b = 1.019 ERB(fc),
  // applied with zero phase. Filtering is circular, like the Hilbert and
  // modulation stages downstream, so the statistics do not depend on where
  // a stationary recording happens to start.
  const auto x = clip.samples();
  const std::size_t n = x.size();
  RealFft forward(n);
  std::vector<Complex> spec(n / 2 + 1);
  forward.forward(x, spec);
  ComplexFft inverse(n, true);
  std::vector<Complex> full(n), time(n);
  Bands bands;
  for (double fc : cochlear_centers(cfg)) {
    const double b = 1.019 * erb_bandwidth(fc);
    std::fill(full.begin(), full.end(), Complex{});
    for (std::size_t k = 1; k < spec.size(); ++k) {
      const double f = static_cast<double>(k) * sr / static_cast<double>(n);
      const double d = (f - fc) / b;
      const double gain = 1.0 / ((1.0 + d * d) * (1.0 + d * d));
      full[k] = spec[k] * gain;
      if (k < n - k) full[n - k] = std::conj(full[k]);
    }
    if (n % 2 == 0) full[n / 2] = Complex(full[n / 2].real(), 0.0);
    inverse.run(full, time);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = time[i].real() / static_cast<double>(n);
    bands.push_back(std::move(out));
  }
  return bands;
}

std::vector<double> decimate_fft(std::span<const double> x, int factor) {
  require(factor >= 1, ErrorCode::kInvalidInput, "decimation factor must be >= 1");
  const std::size_t m = x.size() / static_cast<std::size_t>(factor);
  require(m >= 2, ErrorCode::kInvalidInput, "signal too short to decimate");
  if (factor == 1) return {x.begin(), x.end()};
  const std::size_t n = m * static_cast<std::size_t>(factor);
  RealFft forward(n);
  std::vector<Complex> spec(n / 2 + 1);
  forward.forward(x.first(n), spec);
  // Keep the bins the shorter signal can represent; fold the new Nyquist bin
  // to a real value so the inverse stays real.
  std::vector<Complex> full(m);
  const double scale = static_cast<double>(m) / static_cast<double>(n);
  for (std::size_t k = 0; k <= m / 2; ++k) full[k] = spec[k] * scale;
  if (m % 2 == 0) full[m / 2] = Complex(full[m / 2].real(), 0.0);
  for (std::size_t k = 1; k < (m + 1) / 2; ++k) full[m - k] = std::conj(full[k]);
  ComplexFft inverse(m, true);
  std::vector<Complex> time(m);
  inverse.run(full, time);
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = time[i].real() / static_cast<double>(m);
  return out;
}

Bands compressed_envelopes(const Bands& subbands, int sample_rate, const CochlearConfig& cfg) {
  cfg.validate(sample_rate);
  const int factor = static_cast<int>(std::lround(sample_rate / cfg.envelope_rate));
  Bands out;
  for (const auto& band : subbands) {
    auto env = hilbert_envelope(band);
    for (auto& v : env) v = std::pow(v, cfg.compression_exponent);
    auto low = decimate_fft(env, factor);
    for (auto& v : low) v = std::max(0.0, v);
    out.push_back(std::move(low));
  }
  return out;
}

Bands modulation_decompose(std::span<const double> envelope, const CochlearConfig& cfg) {
  const std::size_t n = envelope.size();
  require(n >= 2, ErrorCode::kInvalidInput, "envelope too short for modulation analysis");
  std::vector<Complex> in(envelope.begin(), envelope.end());
  const auto spec = fft(in);
  Bands bands;
  std::vector<Complex> shaped(n);
  for (double fc : modulation_centers(cfg)) {
    for (std::size_t k = 0; k < n; ++k) {
      // Signed bin frequency; the magnitude response is even, so the
      // filtered spectrum stays conjugate-symmetric.
      const double kk = k <= n / 2 ? double(k) : double(k) - double(n);
      const double f = std::abs(kk) * cfg.envelope_rate / static_cast<double>(n);
      double gain = 0;
      if (f > 0) {
        const double detune = cfg.modulation_q * (f / fc - fc / f);
        gain = 1.0 / std::sqrt(1.0 + detune * detune);
      }
      shaped[k] = spec[k] * gain;
    }
    const auto time = ifft(shaped);
    std::vector<double> band(n);
    for (std::size_t i = 0; i < n; ++i) band[i] = time[i].real();
    bands.push_back(std::move(band));
  }
  return bands;
}

std::vector<EnvelopePair> modulation_pairs(int n_bands) {
  std::vector<EnvelopePair> pairs;
  for (int i = 0; i < n_bands; ++i)
    for (int j = std::max(0, i - 2); j <= std::min(n_bands - 1, i + 2); ++j)
      pairs.push_back({i, j});
  return pairs;
}

double safe_correlation(std::span<const double> x, std::span<const double> y,
                        bool* degenerate) {
  require(x.size() == y.size() && !x.empty(), ErrorCode::kShapeMismatch,
          "correlation needs equal, nonzero lengths");
  const double mx = mean(x), my = mean(y);
  const double vx = sample_variance(x, mx), vy = sample_variance(y, my);
  if (is_constant(vx, mx) || is_constant(vy, my)) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  double cxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) cxy += (x[i] - mx) * (y[i] - my);
  cxy /= static_cast<double>(x.size());
  return std::clamp(cxy / std::sqrt(vx * vy), -1.0, 1.0);
}

CochlearStats stats_from_envelopes(const Bands& envelopes, const CochlearConfig& cfg) {
  const int nb = cfg.n_cochlear_filters;
  const int nm = cfg.n_modulation_filters;
  require(static_cast<int>(envelopes.size()) == nb, ErrorCode::kShapeMismatch,
          fmt::format("expected {} envelopes, got {}", nb, envelopes.size()));
  const auto pairs = modulation_pairs(nb);
  require(static_cast<int>(pairs.size()) == kModulationPairs, ErrorCode::kInvalidInput,
          fmt::format("pair strategy yields {} pairs, expected {}", pairs.size(),
                      kModulationPairs));

  CochlearStats s;
  s.s1_env_power.resize(nb);
  s.s2_env_marginals.resize(nb, 4);
  s.s3_env_variance.resize(nb);
  s.s4_env_corr.resize(nb, nb);
  s.s5_mod_power.resize(nb, nm);
  s.s6_mod_variance.resize(nb, nm);
  s.s7_mod_corr.resize(static_cast<Eigen::Index>(pairs.size()), nm);

  std::vector<Eigen::MatrixXd> mod(static_cast<std::size_t>(nb));  // samples x nm
  for (int i = 0; i < nb; ++i) {
    const auto& e = envelopes[i];
    require(e.size() >= 2, ErrorCode::kInvalidInput, "envelope too short");
    const Moments m = moments(e);
    double power = 0;
    for (double v : e) power += v * v;
    s.s1_env_power(i) = power / static_cast<double>(e.size());
    const bool flat = is_constant(m.variance, m.mean);
    if (flat || m.mean <= 0) ++s.degenerate;
    s.s2_env_marginals(i, 0) = m.mean;
    s.s2_env_marginals(i, 1) = m.mean > 0 ? m.variance / (m.mean * m.mean) : 0.0;
    s.s2_env_marginals(i, 2) = flat ? 0.0 : m.skewness;
    s.s2_env_marginals(i, 3) = flat ? 0.0 : m.kurtosis;
    s.s3_env_variance(i) = m.variance;

    const auto bands = modulation_decompose(e, cfg);
    mod[i].resize(static_cast<Eigen::Index>(e.size()), nm);
    for (int b = 0; b < nm; ++b) {
      const auto& band = bands[b];
      mod[i].col(b) = Eigen::Map<const Eigen::VectorXd>(band.data(), band.size());
      double p = 0;
      for (double v : band) p += v * v;
      s.s5_mod_power(i, b) = p / static_cast<double>(band.size());
      s.s6_mod_variance(i, b) = variance(band);
    }
  }

  for (int i = 0; i < nb; ++i) {
    s.s4_env_corr(i, i) = 1.0;
    for (int j = i + 1; j < nb; ++j) {
      bool bad = false;
      const double c = safe_correlation(envelopes[i], envelopes[j], &bad);
      s.degenerate += bad;
      s.s4_env_corr(i, j) = s.s4_env_corr(j, i) = c;
    }
  }

  for (std::size_t p = 0; p < pairs.size(); ++p) {
    for (int b = 0; b < nm; ++b) {
      bool bad = false;
      s.s7_mod_corr(static_cast<Eigen::Index>(p), b) =
          safe_correlation(column(mod[pairs[p].a], b), column(mod[pairs[p].b], b), &bad);
      s.degenerate += bad;
    }
  }
  return s;
}

CochlearStats compute_stats(const AudioClip& clip, const CochlearConfig& cfg) {
  return stats_from_envelopes(
      compressed_envelopes(gammatone_decompose(clip, cfg), clip.sample_rate(), cfg), cfg);
}

std::array<Eigen::VectorXd, 7> CochlearStats::sets() const {
  return {s1_env_power,       flat(s2_env_marginals), s3_env_variance, flat(s4_env_corr),
          flat(s5_mod_power), flat(s6_mod_variance),  flat(s7_mod_corr)};
}

Eigen::VectorXd CochlearStats::flatten() const {
  const auto parts = sets();
  Eigen::Index total = 0;
  for (const auto& p : parts) total += p.size();
  Eigen::VectorXd out(total);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.segment(at, p.size()) = p;
    at += p.size();
  }
  return out;
}

double cpm(const CochlearStats& a, const CochlearStats& b) {
  const auto sa = a.sets();
  const auto sb = b.sets();
  double total = 0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    require(sa[i].size() == sb[i].size(), ErrorCode::kShapeMismatch,
            fmt::format("statistic set {} sizes differ", i + 1));
    try {
      total += cosine_distance({sa[i].data(), static_cast<std::size_t>(sa[i].size())},
                               {sb[i].data(), static_cast<std::size_t>(sb[i].size())});
    } catch (const Error& e) {
      fail(e.code(), fmt::format("statistic set {}: {}", i + 1, e.what()));
    }
  }
  return total;
}

void to_json(nlohmann::json& j, const CochlearStats& s) {
  j = nlohmann::json{{"s1_env_power", to_vec(s.s1_env_power)},
                     {"s2_env_marginals", to_vec(s.s2_env_marginals)},
                     {"s3_env_variance", to_vec(s.s3_env_variance)},
                     {"s4_env_corr", to_vec(s.s4_env_corr)},
                     {"s5_mod_power", to_vec(s.s5_mod_power)},
                     {"s6_mod_variance", to_vec(s.s6_mod_variance)},
                     {"s7_mod_corr", to_vec(s.s7_mod_corr)},
                     {"pair_strategy", kPairStrategy},
                     {"degenerate", s.degenerate}};
}

void from_json(const nlohmann::json& j, CochlearStats& s) {
  try {
    require(j.value("pair_strategy", std::string(kPairStrategy)) == kPairStrategy,
            ErrorCode::kParse, "stats dump uses a different pair strategy");
    constexpr int nb = kCochlearFilters, nm = kModulationFilters;
    s.s1_env_power = from_json_matrix(j, "s1_env_power", nb, 1);
    s.s2_env_marginals = from_json_matrix(j, "s2_env_marginals", nb, 4);
    s.s3_env_variance = from_json_matrix(j, "s3_env_variance", nb, 1);
    s.s4_env_corr = from_json_matrix(j, "s4_env_corr", nb, nb);
    s.s5_mod_power = from_json_matrix(j, "s5_mod_power", nb, nm);
    s.s6_mod_variance = from_json_matrix(j, "s6_mod_variance", nb, nm);
    s.s7_mod_corr = from_json_matrix(j, "s7_mod_corr", kModulationPairs, nm);
    s.degenerate = j.value("degenerate", 0);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, std::string("malformed stats dump: ") + e.what());
  }
}

void save_stats(const CochlearStats& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::kIo, "cannot write " + path.string());
  // max_digits10 keeps the round trip exact.
  out << nlohmann::json(s).dump() << '\n';
  require(out.good(), ErrorCode::kIo, "failed writing " + path.string());
}

CochlearStats load_stats(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return j.get<CochlearStats>();
}

}  // namespace texm::cochlear
