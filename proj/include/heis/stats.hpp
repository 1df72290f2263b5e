#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace heis {

// Streaming mean/variance (Welford) with deterministic pairwise merge.
struct RunningStat {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }

  // Chan et al. merge; called in fixed batch order so results are scheduling-independent.
  void merge(const RunningStat& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(count), nb = static_cast<double>(o.count);
    const double d = o.mean - mean;
    const double n = na + nb;
    mean += d * nb / n;
    m2 += o.m2 + d * d * na * nb / n;
    count += o.count;
  }

  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  // standard error of the mean
  double sem() const { return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0; }
};

struct LinearFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double r2 = std::numeric_limits<double>::quiet_NaN();
  std::size_t points = 0;
};

inline LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  LinearFit f;
  const std::size_t n = xs.size();
  f.points = n;
  if (n < 2 || ys.size() != n) return f;
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

// Binomial standard error for a fraction estimated from k/n samples.
inline double binomial_sigma(double p, std::uint64_t n) {
  if (n == 0) return std::numeric_limits<double>::infinity();
  const double q = p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
  return std::sqrt(q * (1.0 - q) / static_cast<double>(n));
}

}  // namespace heis
