#include "texm/signal/hilbert.h"

#include <cmath>

#include "texm/error.h"
#include "texm/signal/fft.h"

namespace texm {

std::vector<double> hilbert_envelope(std::span<const double> samples) {
  require(samples.size() >= 2, ErrorCode::kInvalidInput,
          "hilbert envelope needs at least two samples");
  const std::size_t n = samples.size();
  std::vector<Complex> buf(samples.begin(), samples.end());
  ComplexFft(n, false).run(buf, buf);

  // Keep DC (and Nyquist for even n), double positive bins, zero the rest.
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k < n; ++k) {
    if (k < (n + 1) / 2) {
      buf[k] *= 2.0;
    } else if (!(n % 2 == 0 && k == half)) {
      buf[k] = 0.0;
    }
  }

  ComplexFft(n, true).run(buf, buf);
  std::vector<double> env(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) env[i] = std::abs(buf[i]) * scale;
  return env;
}

}  // namespace texm
