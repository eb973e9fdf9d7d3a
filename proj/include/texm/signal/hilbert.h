#pragma once

#include <span>
#include <vector>

namespace texm {

// Magnitude of the analytic signal, computed with the FFT method.
std::vector<double> hilbert_envelope(std::span<const double> samples);

}  // namespace texm
