#pragma once

#include <vector>

#include "texm/signal/rng.h"

namespace texm::syntex {

struct EventSchedule {
  std::vector<double> onsets;  // sorted, within [0, duration)
  // Raw Gaussian offset of each grid event before folding into the clip.
  std::vector<double> jitter;
  double eps = 0;
  double irreg_exp = 0;
  double sd = 0;
};

// sd = (0.1 * irreg_exp * 10^irreg_exp) / eps
double onset_sd(double eps, double irreg_exp);

// Events on the grid k/eps, each displaced by Normal(0, onset_sd), reflected
// back into [0, duration) and sorted. irreg_exp == 0 gives the exact grid.
EventSchedule schedule_events(double eps, double irreg_exp, double duration, SeededRng& rng);

}  // namespace texm::syntex
