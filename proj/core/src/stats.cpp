#include "meanfield/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace meanfield {

MeanEstimate mean_and_stderr(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean_and_stderr: no samples");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: x values are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = y[i] - (fit.slope * x[i] + fit.intercept);
      rss += e * e;
    }
    const double s2 = rss / (n - 2.0);
    fit.slope_se = std::sqrt(s2 / sxx);
    fit.intercept_se = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  }
  return fit;
}

namespace {

int concordance(std::span<const double> y) {
  int s = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = i + 1; j < y.size(); ++j) s += (y[j] > y[i]) - (y[j] < y[i]);
  return s;
}

}  // namespace

TrendTest kendall_trend(std::span<const double> y) {
  const std::size_t n = y.size();
  if (n < 2) throw std::invalid_argument("kendall_trend: need >= 2 points");
  const int s = concordance(y);
  const double pairs = static_cast<double>(n * (n - 1) / 2);
  TrendTest out;
  out.tau = s / pairs;
  if (n <= 10) {
    std::vector<double> perm(n);
    std::iota(perm.begin(), perm.end(), 0.0);
    long long total = 0, at_least = 0;
    do {
      ++total;
      if (concordance(perm) >= s) ++at_least;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.p_increasing = static_cast<double>(at_least) / static_cast<double>(total);
  } else {
    const double nn = static_cast<double>(n);
    const double var = nn * (nn - 1.0) * (2.0 * nn + 5.0) / 18.0;
    const double z = (s - 1.0) / std::sqrt(var);  // continuity-corrected
    out.p_increasing = 0.5 * std::erfc(z / std::sqrt(2.0));
  }
  return out;
}

}  // namespace meanfield
