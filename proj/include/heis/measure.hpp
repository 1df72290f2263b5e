#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "parallel.hpp"
#include "sets.hpp"
#include "stats.hpp"

namespace heis {

// Haar measure of H^n is Lebesgue measure in (z, t) coordinates; volumes are estimated by
// rejection Monte Carlo from coordinate boxes. Work is split into fixed-size batches with
// per-batch derived RNG streams and merged in batch order, so every estimate is bit-identical
// for a given (inputs, seed, batch size) regardless of the thread count.

inline constexpr std::uint64_t kMcBatch = 16384;

template <int N>
struct Box {
  std::array<double, 2 * N + 1> lo{}, hi{};

  double volume() const {
    double v = 1.0;
    for (int i = 0; i < 2 * N + 1; ++i) v *= hi[i] - lo[i];
    return v;
  }
};

// Tight coordinate box of a Koranyi ball B(c, r): the left-translated box picks up the
// twist term 2 Im<z_c, z_u>, bounded by 2 r |z_c|.
template <int N>
Box<N> bounding_box(const Ball<N>& ball) {
  const double pad = ball.metric == Metric::CC ? 1.05 : 1.0;  // CC ball inside Koranyi ball
  const double r = pad * ball.radius;
  Box<N> box;
  const auto c = to_coords<N>(ball.center);
  for (int i = 0; i < 2 * N; ++i) {
    box.lo[i] = c[i] - r;
    box.hi[i] = c[i] + r;
  }
  const double zc = std::sqrt(horizontal_norm_sq<N>(ball.center));
  const double tr = r * r + 2.0 * r * zc;
  box.lo[2 * N] = c[2 * N] - tr;
  box.hi[2 * N] = c[2 * N] + tr;
  return box;
}

template <int N>
HPoint<N> sample_box(const Box<N>& box, Rng& rng) {
  std::array<double, 2 * N + 1> c;
  for (int i = 0; i < 2 * N + 1; ++i) c[i] = rng.uniform(box.lo[i], box.hi[i]);
  return from_coords<N>(c);
}

struct McFraction {
  double fraction = 0.0;
  double sigma = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;
};

template <int N>
McFraction mc_box_fraction(const Box<N>& box, const std::function<bool(const HPoint<N>&)>& pred,
                           std::uint64_t samples, std::uint64_t seed) {
  const std::uint64_t batches = (samples + kMcBatch - 1) / kMcBatch;
  std::vector<std::uint64_t> hits(batches, 0);
  parallel_for(batches, [&](std::size_t b) {
    Rng rng = derive_rng(seed, 0xb0f00000ULL + b);
    const std::uint64_t lo = b * kMcBatch;
    const std::uint64_t n = std::min(kMcBatch, samples - lo);
    std::uint64_t h = 0;
    for (std::uint64_t i = 0; i < n; ++i)
      if (pred(sample_box<N>(box, rng))) ++h;
    hits[b] = h;
  });
  McFraction out;
  out.samples = samples;
  for (std::uint64_t h : hits) out.hits += h;
  out.fraction = samples ? static_cast<double>(out.hits) / static_cast<double>(samples) : 0.0;
  out.sigma = binomial_sigma(out.fraction, samples);
  return out;
}

struct VolumeEstimate {
  double value = 0.0;
  double sigma = 0.0;
  double acceptance = 0.0;
  std::uint64_t samples = 0;
};

template <int N>
VolumeEstimate set_volume_estimate(const MeasurableSet<N>& s, std::uint64_t samples, std::uint64_t seed) {
  const Box<N> box = bounding_box<N>(s.bound);
  const McFraction f = mc_box_fraction<N>(box, s.contains, samples, seed);
  VolumeEstimate v;
  v.value = box.volume() * f.fraction;
  v.sigma = box.volume() * f.sigma;
  v.acceptance = f.fraction;
  v.samples = samples;
  return v;
}

template <int N>
VolumeEstimate ball_volume_estimate(const Ball<N>& ball, std::uint64_t samples, std::uint64_t seed,
                                    const MetricContext<N>& ctx = {}) {
  return set_volume_estimate<N>(set_from_ball<N>(ball, ctx), samples, seed);
}

struct MeanEstimate {
  double value = 0.0;
  double sigma = 0.0;  // standard error of the mean
  std::uint64_t samples = 0;
};

// Mean of u over B under the uniform (normalized Haar) law; aborts on non-finite values.
template <int N>
MeanEstimate integrate_over_ball(const std::function<double(const HPoint<N>&)>& u, const Ball<N>& ball,
                                 std::uint64_t samples, std::uint64_t seed, const MetricContext<N>& ctx = {}) {
  const MeasurableSet<N> s = set_from_ball<N>(ball, ctx);
  const Box<N> box = bounding_box<N>(ball);
  const std::uint64_t batches = (samples + kMcBatch - 1) / kMcBatch;
  std::vector<RunningStat> stats(batches);
  std::vector<std::string> errors(batches);
  parallel_for(batches, [&](std::size_t b) {
    Rng rng = derive_rng(seed, 0x1e700000ULL + b);
    const std::uint64_t lo = b * kMcBatch;
    const std::uint64_t n = std::min(kMcBatch, samples - lo);
    RunningStat st;
    for (std::uint64_t i = 0; i < n; ++i) {
      const HPoint<N> x = sample_box<N>(box, rng);
      if (!s.contains(x)) continue;
      const double v = u(x);
      if (!std::isfinite(v)) {
        const auto c = to_coords<N>(x);
        std::string where = "(";
        for (double cv : c) where += std::to_string(cv) + ",";
        where.back() = ')';
        errors[b] = "integrate_over_ball: non-finite integrand at " + where;
        return;
      }
      st.add(v);
    }
    stats[b] = st;
  });
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error(e);
  RunningStat total;
  for (const auto& st : stats) total.merge(st);
  MeanEstimate m;
  m.value = total.mean;
  m.sigma = total.sem();
  m.samples = total.count;
  return m;
}

struct DensityEstimate {
  double density = 0.0;
  double sigma = 0.0;
  std::uint64_t hits = 0;      // samples landing in E (and B)
  std::uint64_t in_ball = 0;   // samples landing in B
  std::uint64_t samples = 0;   // box proposals
};

// mu(E intersect B) / mu(B), sampled uniformly on B.
template <int N>
DensityEstimate density_in_ball(const std::function<bool(const HPoint<N>&)>& in_e, const Ball<N>& ball,
                                std::uint64_t samples, std::uint64_t seed, const MetricContext<N>& ctx = {}) {
  const MeasurableSet<N> s = set_from_ball<N>(ball, ctx);
  const Box<N> box = bounding_box<N>(ball);
  const std::uint64_t batches = (samples + kMcBatch - 1) / kMcBatch;
  std::vector<std::uint64_t> hit(batches, 0), inb(batches, 0);
  parallel_for(batches, [&](std::size_t b) {
    Rng rng = derive_rng(seed, 0xde500000ULL + b);
    const std::uint64_t lo = b * kMcBatch;
    const std::uint64_t n = std::min(kMcBatch, samples - lo);
    std::uint64_t h = 0, ib = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      const HPoint<N> x = sample_box<N>(box, rng);
      if (!s.contains(x)) continue;
      ++ib;
      if (in_e(x)) ++h;
    }
    hit[b] = h;
    inb[b] = ib;
  });
  DensityEstimate d;
  d.samples = samples;
  for (std::size_t b = 0; b < batches; ++b) {
    d.hits += hit[b];
    d.in_ball += inb[b];
  }
  if (d.in_ball == 0) throw std::runtime_error("density_in_ball: no samples landed in the ball");
  d.density = static_cast<double>(d.hits) / static_cast<double>(d.in_ball);
  d.sigma = binomial_sigma(d.density, d.in_ball);
  return d;
}

}  // namespace heis
