#pragma once

#include <span>

namespace texm {

double mean(std::span<const double> xs);
// Population variance (divisor n).
double variance(std::span<const double> xs);

struct Moments {
  double mean = 0;
  double variance = 0;  // population
  double skewness = 0;
  double kurtosis = 0;  // non-excess; 3 for a Gaussian
};
Moments moments(std::span<const double> xs);

// Throws kDegenerateInput when either input has zero variance.
double pearson_correlation(std::span<const double> xs, std::span<const double> ys);

// 1 - cos(angle). Throws kDegenerateInput on a zero-norm vector.
double cosine_distance(std::span<const double> a, std::span<const double> b);

}  // namespace texm
