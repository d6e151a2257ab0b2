#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "locsk/errors.hpp"

namespace locsk {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

struct SummaryStats {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double se_mean = 0.0;
  double se_variance = 0.0;
  double se_skewness = 0.0;
  double se_kurtosis = 0.0;
  double ks_distance = 0.0;  // standardized sample vs N(0, 1)
  bool degenerate = false;   // zero variance
};

// Two-sided Kolmogorov-Smirnov distance of a sample to N(0, 1).
inline double ks_distance_normal(std::vector<double> z) {
  if (z.empty()) return 1.0;
  std::sort(z.begin(), z.end());
  const double n = static_cast<double>(z.size());
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double F = normal_cdf(z[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return std::clamp(d, 0.0, 1.0);
}

inline SummaryStats summarize(std::span<const double> xs) {
  if (xs.size() < 2) throw Degenerate("need at least two samples to summarize");
  SummaryStats s;
  s.n = xs.size();
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  s.variance = m2 / (n - 1.0);
  s.se_mean = std::sqrt(s.variance / n);
  s.se_variance = s.variance * std::sqrt(2.0 / (n - 1.0));
  s.se_skewness = std::sqrt(6.0 / n);
  s.se_kurtosis = std::sqrt(24.0 / n);
  m2 /= n;
  m3 /= n;
  m4 /= n;
  // a spread this small relative to the mean is round-off
  if (m2 <= 1e-30 * std::max(1.0, s.mean * s.mean)) {
    s.variance = 0.0;
    s.se_variance = 0.0;
    s.degenerate = true;
    s.ks_distance = 1.0;
    return s;
  }
  s.skewness = m3 / std::pow(m2, 1.5);
  s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  const double sd = std::sqrt(s.variance);
  std::vector<double> z(xs.begin(), xs.end());
  for (double& v : z) v = (v - s.mean) / sd;
  s.ks_distance = ks_distance_normal(std::move(z));
  return s;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(std::span<const double> xs) {
  MeanSe out;
  if (xs.empty()) return out;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) out.mean += x;
  out.mean /= n;
  if (xs.size() < 2) return out;
  double v = 0.0;
  for (double x : xs) v += (x - out.mean) * (x - out.mean);
  out.se = std::sqrt(v / (n - 1.0) / n);
  return out;
}

// Least-squares slope of log y against log x. NaN unless at least two
// points have x > 0 and y > 0.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return std::nan("");
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) return std::nan("");
  return sxy / sxx;
}

}  // namespace locsk
