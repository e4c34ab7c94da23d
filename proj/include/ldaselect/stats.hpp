#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "ldaselect/errors.hpp"

namespace ldaselect {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw ValidationError("mean of empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Sample standard deviation (n-1 denominator); undefined below two points.
inline std::optional<double> sample_std(std::span<const double> xs) {
  const auto n = xs.size();
  if (n < 2) return std::nullopt;
  double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

// Even-length samples take the mean of the two central order statistics.
inline double median(std::span<const double> xs) {
  if (xs.empty()) throw ValidationError("median of empty sample");
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Adjusted Fisher-Pearson coefficient, g1 * sqrt(n(n-1)) / (n-2).
// Undefined for n < 3 or a degenerate (zero-variance) sample.
inline std::optional<double> adjusted_skewness(std::span<const double> xs) {
  const auto n = xs.size();
  if (n < 3) return std::nullopt;
  double m = mean(xs);
  double m2 = 0.0, m3 = 0.0;
  for (double x : xs) {
    double d = x - m;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  if (!(m2 > 0.0)) return std::nullopt;
  double g1 = m3 / std::pow(m2, 1.5);
  double nn = static_cast<double>(n);
  return g1 * std::sqrt(nn * (nn - 1.0)) / (nn - 2.0);
}

// Linearly interpolated empirical percentile of an ascending sample:
// the order statistic at fractional index p*(n-1).
inline double percentile_linear(std::span<const double> sorted_ascending, double p) {
  if (sorted_ascending.empty()) throw ValidationError("percentile of empty sample");
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("percentile must lie in (0,1)");
  const auto n = sorted_ascending.size();
  if (n == 1) return sorted_ascending[0];
  double h = p * static_cast<double>(n - 1);
  auto lo = static_cast<std::size_t>(h);
  if (lo >= n - 1) return sorted_ascending[n - 1];
  double frac = h - static_cast<double>(lo);
  return sorted_ascending[lo] + frac * (sorted_ascending[lo + 1] - sorted_ascending[lo]);
}

}  // namespace ldaselect
