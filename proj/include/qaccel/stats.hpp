#pragma once

#include <span>

namespace qaccel {

struct RankTestResult {
  double u = 0.0;  // U statistic of the first sample
  double z = 0.0;
  /// One-sided p-value for "first sample tends to be larger".
  double p_greater = 1.0;
  double p_two_sided = 1.0;
};

/// Mann-Whitney U test with average ranks for ties, tie-corrected variance
/// and the normal approximation (with continuity correction).
RankTestResult mann_whitney(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> v);
/// Sample standard deviation (n - 1 denominator).
double stddev(std::span<const double> v);

}  // namespace qaccel
