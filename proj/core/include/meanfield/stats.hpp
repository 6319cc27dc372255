#pragma once

#include <span>
#include <utility>

namespace meanfield {

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample std / sqrt(n); 0 when n == 1
};

MeanEstimate mean_and_stderr(std::span<const double> values);

/// Ordinary least squares y = slope * x + intercept with standard errors.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Kendall's tau of y against its index order, with the exact one-sided
/// p-value for an increasing trend (permutation distribution, n <= 10) or its
/// normal approximation beyond.
struct TrendTest {
  double tau = 0.0;
  double p_increasing = 1.0;
};

TrendTest kendall_trend(std::span<const double> y);

}  // namespace meanfield
