#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cc.hpp"
#include "core.hpp"
#include "metrics_basic.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace heis {

// Metric dispatch used by samplers and set estimators. CC distances go through the
// polyline optimizer, so they are estimates (upper bounds) with optimizer tolerance;
// everything Koranyi is exact up to rounding.
template <int N>
struct MetricContext {
  Metric metric = Metric::Koranyi;
  CcConfig cc = cc_fast_config();

  double distance(const HPoint<N>& p, const HPoint<N>& q) const {
    if (metric == Metric::Koranyi) return koranyi_distance<N>(p, q);
    return cc_distance_estimate<N>(p, q, cc).distance;
  }

  double norm(const HPoint<N>& p) const {
    if (metric == Metric::Koranyi) return koranyi_norm<N>(p);
    return cc_distance_estimate<N>(HPoint<N>::identity(), p, cc).distance;
  }
};

// Gaussian direction radially projected onto the unit Koranyi sphere via a dilation;
// covers the whole sphere with positive density.
template <int N>
HPoint<N> unit_koranyi_direction(Rng& rng) {
  for (;;) {
    HPoint<N> u;
    for (int j = 0; j < N; ++j) u.z[j] = cplx(rng.normal(), rng.normal());
    u.t = rng.normal();
    const double s = koranyi_norm<N>(u);
    if (s > 1e-12) return dilate<N>(1.0 / s, u);
  }
}

// Points at metric distance exactly r from center (Koranyi: exact by left-invariance and
// homogeneity; CC: radius corrected through the homogeneity of the estimated distance).
template <int N>
std::vector<HPoint<N>> sphere_sample(const HPoint<N>& center, double r, int count, std::uint64_t seed,
                                     const MetricContext<N>& ctx = {}) {
  if (!(r > 0.0)) throw std::invalid_argument("sphere_sample: radius must be positive");
  std::vector<HPoint<N>> out;
  out.reserve(static_cast<std::size_t>(count));
  Rng rng = derive_rng(seed, 0x73706872ULL);
  for (int i = 0; i < count; ++i) {
    const HPoint<N> w = unit_koranyi_direction<N>(rng);
    double s = r;
    if (ctx.metric == Metric::CC) {
      const double dcc = ctx.norm(w);
      if (!(dcc > 0.0)) {
        --i;
        continue;
      }
      s = r / dcc;
    }
    out.push_back(multiply(center, dilate<N>(s, w)));
  }
  return out;
}

template <int N>
struct BallSample {
  std::vector<HPoint<N>> points;
  std::uint64_t attempts = 0;  // box proposals consumed (acceptance diagnostics)
};

// Uniform law on the unit Koranyi ball via rejection from its coordinate box, then mapped
// by dilation + left translation (both Haar-preserving up to the constant): uniform on B.
template <int N>
BallSample<N> ball_sample_interior(const Ball<N>& ball, int count, std::uint64_t seed,
                                   const MetricContext<N>& ctx = {}) {
  if (!(ball.radius > 0.0)) throw std::invalid_argument("ball_sample_interior: radius must be positive");
  BallSample<N> out;
  out.points.reserve(static_cast<std::size_t>(count));
  Rng rng = derive_rng(seed, 0x62616c6cULL);
  const bool cc = ball.metric == Metric::CC;
  const double pad = cc ? 1.05 : 1.0;  // CC unit ball sits inside the Koranyi unit ball; padded for safety
  const std::uint64_t max_attempts = 20000ULL * static_cast<std::uint64_t>(count) + 100000ULL;
  while (out.points.size() < static_cast<std::size_t>(count)) {
    if (out.attempts > max_attempts)
      throw std::runtime_error("ball_sample_interior: acceptance rate collapsed");
    ++out.attempts;
    HPoint<N> u;
    for (int j = 0; j < N; ++j) u.z[j] = cplx(rng.uniform(-pad, pad), rng.uniform(-pad, pad));
    u.t = rng.uniform(-pad * pad, pad * pad);
    if (!(koranyi_norm<N>(u) < pad)) continue;
    if (cc) {
      if (!(cc_distance_estimate<N>(HPoint<N>::identity(), u, ctx.cc).distance < 1.0)) continue;
    } else if (!(koranyi_norm<N>(u) < 1.0)) {
      continue;
    }
    out.points.push_back(multiply(ball.center, dilate<N>(ball.radius, u)));
  }
  return out;
}

struct BilipInterval {
  double c1 = std::numeric_limits<double>::infinity();  // empirical min of d_cc / d_K
  double c2 = 0.0;                                      // empirical max of d_cc / d_K
  int pairs = 0;
};

// Empirical bi-Lipschitz comparability constants of d_cc vs d_K over random pairs in
// B_K(0, radius). d_cc estimates are upper bounds, so c1 >= 1 up to rounding and c2
// carries the optimizer's slack on top of the true constant.
template <int N>
BilipInterval bilip_interval(int pairs, double radius, std::uint64_t seed, const CcConfig& cc) {
  if (pairs < 1) throw std::invalid_argument("bilip_interval: need at least one pair");
  Ball<N> domain{HPoint<N>::identity(), radius, Metric::Koranyi};
  const auto pts = ball_sample_interior<N>(domain, 2 * pairs, seed);
  std::vector<double> ratio(static_cast<std::size_t>(pairs));
  parallel_for(static_cast<std::size_t>(pairs), [&](std::size_t i) {
    const HPoint<N>& p = pts.points[2 * i];
    const HPoint<N>& q = pts.points[2 * i + 1];
    ratio[i] = cc_distance_estimate<N>(p, q, cc).distance / koranyi_distance<N>(p, q);
  });
  BilipInterval out;
  out.pairs = pairs;
  for (double r : ratio) {
    out.c1 = std::min(out.c1, r);
    out.c2 = std::max(out.c2, r);
  }
  return out;
}

}  // namespace heis
