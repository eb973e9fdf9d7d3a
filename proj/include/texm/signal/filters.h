#pragma once

#include <span>
#include <vector>

namespace texm {

// Normalized biquad coefficients (a0 == 1).
struct BiquadCoefficients {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
};

// Audio-EQ-cookbook designs. Bandpass has 0 dB peak gain.
BiquadCoefficients design_bandpass(double center, double q, double sample_rate);
BiquadCoefficients design_lowpass(double cutoff, double q, double sample_rate);
// First-order bilinear lowpass stored in biquad form (b2 = a2 = 0).
BiquadCoefficients design_lowpass_first_order(double cutoff, double sample_rate);

// Direct form I state; coefficients may change between calls without
// resetting state.
class Biquad {
 public:
  Biquad() = default;
  explicit Biquad(const BiquadCoefficients& c) : c_(c) {}

  void set(const BiquadCoefficients& c) { c_ = c; }
  const BiquadCoefficients& coefficients() const { return c_; }
  void reset() { x1_ = x2_ = y1_ = y2_ = 0; }

  double process(double x) {
    const double y = c_.b0 * x + c_.b1 * x1_ + c_.b2 * x2_ - c_.a1 * y1_ - c_.a2 * y2_;
    x2_ = x1_;
    x1_ = x;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  BiquadCoefficients c_;
  double x1_ = 0, x2_ = 0, y1_ = 0, y2_ = 0;
};

// Butterworth lowpass of arbitrary order as cascaded second-order sections
// (plus one first-order section for odd orders).
std::vector<BiquadCoefficients> design_butterworth_lowpass(double cutoff, int order,
                                                           double sample_rate);

std::vector<double> biquad_bandpass(std::span<const double> samples, double center,
                                    double q, double sample_rate);
std::vector<double> lowpass_n(std::span<const double> samples, double cutoff,
                              int order, double sample_rate);
std::vector<double> apply_cascade(std::span<const double> samples,
                                  std::span<const BiquadCoefficients> sections);

}  // namespace texm
