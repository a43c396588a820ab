#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace cats::test {

struct TrendFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  double intercept = 0.0;

  double t_statistic() const { return stderr_slope > 0.0 ? slope / stderr_slope : 0.0; }
};

/// Ordinary least squares of y against x = 0..n-1 with the usual
/// residual-based standard error of the slope.
inline TrendFit linear_trend(std::span<const double> y) {
  TrendFit fit;
  std::size_t n = y.size();
  if (n < 3) return fit;
  double xbar = static_cast<double>(n - 1) / 2.0;
  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = static_cast<double>(i) - xbar;
    sxx += dx * dx;
    sxy += dx * (y[i] - ybar);
  }
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double ss_resid = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = fit.intercept + fit.slope * static_cast<double>(i);
    double r = y[i] - pred;
    ss_resid += r * r;
  }
  double sigma2 = ss_resid / static_cast<double>(n - 2);
  fit.stderr_slope = std::sqrt(sigma2 / sxx);
  return fit;
}

inline double mean(std::span<const double> y) {
  if (y.empty()) return 0.0;
  double s = 0.0;
  for (double v : y) s += v;
  return s / static_cast<double>(y.size());
}

}  // namespace cats::test
