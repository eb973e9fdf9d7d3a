#include "texm/syntex/schedule.h"

#include <algorithm>
#include <cmath>

#include "texm/error.h"

namespace texm::syntex {
namespace {

// Folds t into [0, duration) by mirroring at both ends.
double reflect(double t, double duration) {
  const double period = 2 * duration;
  t = std::fmod(t, period);
  if (t < 0) t += period;
  if (t >= duration) t = period - t;
  return std::clamp(t, 0.0, std::nextafter(duration, 0.0));
}

}  // namespace

double onset_sd(double eps, double irreg_exp) {
  return 0.1 * irreg_exp * std::pow(10.0, irreg_exp) / eps;
}

EventSchedule schedule_events(double eps, double irreg_exp, double duration, SeededRng& rng) {
  require(eps > 0 && std::isfinite(eps), ErrorCode::kInvalidInput, "eps must be positive");
  require(irreg_exp >= 0 && irreg_exp <= 1, ErrorCode::kInvalidInput,
          "irreg_exp must lie in [0, 1]");
  EventSchedule s;
  s.eps = eps;
  s.irreg_exp = irreg_exp;
  s.sd = onset_sd(eps, irreg_exp);
  if (!(duration > 0)) return s;

  for (long k = 0;; ++k) {
    const double grid = static_cast<double>(k) / eps;
    if (grid >= duration) break;
    // Always draw so the stream does not depend on irreg_exp.
    const double offset = s.sd * rng.normal();
    s.jitter.push_back(offset);
    s.onsets.push_back(s.sd == 0 ? grid : reflect(grid + offset, duration));
  }
  std::sort(s.onsets.begin(), s.onsets.end());
  return s;
}

}  // namespace texm::syntex
