#include "texm/signal/filters.h"

#include <cmath>
#include <numbers>

#include "texm/error.h"

namespace texm {
namespace {

void check_frequency(double f, double sample_rate, const char* what) {
  require(sample_rate > 0 && f > 0 && f < sample_rate / 2, ErrorCode::kInvalidInput,
          std::string(what) + " must lie strictly between 0 and Nyquist");
}

}  // namespace

BiquadCoefficients design_bandpass(double center, double q, double sample_rate) {
  check_frequency(center, sample_rate, "bandpass center");
  require(q > 0, ErrorCode::kInvalidInput, "bandpass q must be positive");
  const double w0 = 2.0 * std::numbers::pi * center / sample_rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  return {alpha / a0, 0.0, -alpha / a0, -2.0 * std::cos(w0) / a0, (1.0 - alpha) / a0};
}

BiquadCoefficients design_lowpass(double cutoff, double q, double sample_rate) {
  check_frequency(cutoff, sample_rate, "lowpass cutoff");
  require(q > 0, ErrorCode::kInvalidInput, "lowpass q must be positive");
  const double w0 = 2.0 * std::numbers::pi * cutoff / sample_rate;
  const double cosw = std::cos(w0);
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  const double b = (1.0 - cosw) / 2.0;
  return {b / a0, 2.0 * b / a0, b / a0, -2.0 * cosw / a0, (1.0 - alpha) / a0};
}

BiquadCoefficients design_lowpass_first_order(double cutoff, double sample_rate) {
  check_frequency(cutoff, sample_rate, "lowpass cutoff");
  const double k = std::tan(std::numbers::pi * cutoff / sample_rate);
  const double a0 = 1.0 + k;
  return {k / a0, k / a0, 0.0, (k - 1.0) / a0, 0.0};
}

std::vector<BiquadCoefficients> design_butterworth_lowpass(double cutoff, int order,
                                                           double sample_rate) {
  require(order >= 1, ErrorCode::kInvalidInput, "filter order must be >= 1");
  std::vector<BiquadCoefficients> sections;
  for (int k = 0; k < order / 2; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + 1.0) / (2.0 * order);
    sections.push_back(design_lowpass(cutoff, 1.0 / (2.0 * std::sin(theta)), sample_rate));
  }
  if (order % 2 == 1) sections.push_back(design_lowpass_first_order(cutoff, sample_rate));
  return sections;
}

std::vector<double> apply_cascade(std::span<const double> samples,
                                  std::span<const BiquadCoefficients> sections) {
  std::vector<double> out(samples.begin(), samples.end());
  for (const auto& c : sections) {
    Biquad f(c);
    for (double& v : out) v = f.process(v);
  }
  return out;
}

std::vector<double> biquad_bandpass(std::span<const double> samples, double center,
                                    double q, double sample_rate) {
  const BiquadCoefficients c = design_bandpass(center, q, sample_rate);
  return apply_cascade(samples, std::span(&c, 1));
}

std::vector<double> lowpass_n(std::span<const double> samples, double cutoff, int order,
                              double sample_rate) {
  return apply_cascade(samples, design_butterworth_lowpass(cutoff, order, sample_rate));
}

}  // namespace texm
