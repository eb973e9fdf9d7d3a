#include "texm/signal/stats.h"

#include <algorithm>
#include <cmath>

#include "texm/error.h"

namespace texm {

double mean(std::span<const double> xs) {
  require(!xs.empty(), ErrorCode::kInvalidInput, "mean of empty sequence");
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  const double m = mean(xs);
  double s = 0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size());
}

Moments moments(std::span<const double> xs) {
  Moments out;
  out.mean = mean(xs);
  double m2 = 0, m3 = 0, m4 = 0;
  for (double x : xs) {
    const double d = x - out.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const auto n = static_cast<double>(xs.size());
  m2 /= n;
  m3 /= n;
  m4 /= n;
  out.variance = m2;
  if (m2 > 0) {
    out.skewness = m3 / std::pow(m2, 1.5);
    out.kurtosis = m4 / (m2 * m2);
  }
  return out;
}

double pearson_correlation(std::span<const double> xs, std::span<const double> ys) {
  require(xs.size() == ys.size(), ErrorCode::kShapeMismatch,
          "pearson correlation needs equal lengths");
  require(xs.size() >= 3, ErrorCode::kInvalidInput,
          "pearson correlation needs at least three points");
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  require(sxx > 0 && syy > 0, ErrorCode::kDegenerateInput,
          "pearson correlation of a constant sequence is undefined");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::fmax(-1.0, std::fmin(1.0, r));
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorCode::kShapeMismatch,
          "cosine distance needs equal lengths");
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  require(aa > 0 && bb > 0, ErrorCode::kDegenerateInput,
          "cosine distance of a zero-norm vector is undefined");
  // Equal inner products mean |a - b|^2 = aa + bb - 2ab = 0; the general
  // formula would leave round-off from the square root.
  if (ab == aa && ab == bb) return 0.0;
  return std::clamp(1.0 - ab / std::sqrt(aa * bb), 0.0, 2.0);
}

}  // namespace texm
