#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fracvort::stats {

double mean(std::span<const double> x);
/// Unbiased sample variance; 0 for fewer than two samples.
double variance(std::span<const double> x);
double median(std::vector<double> x);
/// Linear-interpolated quantile, q in [0, 1].
double quantile(std::vector<double> x, double q);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares y ~ slope * x + intercept.
LineFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Slope of log2(y) against x. Used for rates over dyadic levels.
double log2_slope(std::span<const double> x, std::span<const double> y);

}  // namespace fracvort::stats
