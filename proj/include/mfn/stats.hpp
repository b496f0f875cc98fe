#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace mfn {

// Raw power sums of a scalar sample; enough for mean/variance and their
// standard errors (the variance SE needs the fourth central moment).
struct PowerSums {
  double n = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;
  double s4 = 0.0;

  void add(double x) {
    const double x2 = x * x;
    n += 1.0;
    s1 += x;
    s2 += x2;
    s3 += x2 * x;
    s4 += x2 * x2;
  }
  void merge(const PowerSums& o) {
    n += o.n;
    s1 += o.s1;
    s2 += o.s2;
    s3 += o.s3;
    s4 += o.s4;
  }
  double mean() const { return n > 0 ? s1 / n : 0.0; }
  double central2() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::max(0.0, (s2 - n * m * m) / n);
  }
  double variance() const {  // unbiased
    if (n < 2) return 0.0;
    const double m = mean();
    return std::max(0.0, (s2 - n * m * m) / (n - 1.0));
  }
  double central4() const {
    if (n < 1) return 0.0;
    const double m = mean();
    return (s4 - 4.0 * m * s3 + 6.0 * m * m * s2 - 3.0 * n * m * m * m * m) / n;
  }
  double se_mean() const { return n > 1 ? std::sqrt(variance() / n) : 0.0; }
  // SE of the (unbiased) sample variance.
  double se_variance() const {
    if (n < 2) return 0.0;
    const double m2 = central2();
    const double m4 = central4();
    const double v = (m4 - (n - 3.0) / (n - 1.0) * m2 * m2) / n;
    return v > 0 ? std::sqrt(v) : 0.0;
  }
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = std::numeric_limits<double>::quiet_NaN();
  double residual_rms = 0.0;
};

// Ordinary least squares y = intercept + slope * x with residual-based SE.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  const size_t n = x.size();
  if (n < 2 || y.size() != n) return f;
  double sx = 0, sy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.residual_rms = std::sqrt(ss_res / static_cast<double>(n));
  if (n > 2) f.slope_se = std::sqrt(ss_res / static_cast<double>(n - 2) / sxx);
  return f;
}

inline double sample_sd(const std::vector<double>& xs) {
  const size_t n = xs.size();
  if (n < 2) return 0.0;
  double m = 0;
  for (double x : xs) m += x;
  m /= static_cast<double>(n);
  double s = 0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(n - 1));
}

inline double sample_mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double m = 0;
  for (double x : xs) m += x;
  return m / static_cast<double>(xs.size());
}

}  // namespace mfn
