#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "metrics.hpp"

namespace heis {

// Measurable set given by a membership oracle plus a Koranyi bounding ball that the
// rejection samplers draw from.
template <int N>
struct MeasurableSet {
  std::string label;
  std::function<bool(const HPoint<N>&)> contains;
  Ball<N> bound{};  // always Koranyi
};

template <int N>
MeasurableSet<N> set_from_ball(const Ball<N>& b, const MetricContext<N>& ctx = {}) {
  MeasurableSet<N> s;
  s.label = "ball(r=" + std::to_string(b.radius) + "," + metric_name(b.metric) + ")";
  MetricContext<N> mctx = ctx;
  mctx.metric = b.metric;
  s.contains = [b, mctx](const HPoint<N>& x) { return mctx.distance(b.center, x) < b.radius; };
  s.bound = Ball<N>{b.center, b.metric == Metric::CC ? 1.05 * b.radius : b.radius, Metric::Koranyi};
  return s;
}

template <int N>
std::vector<HPoint<N>> sample_in_set(const MeasurableSet<N>& s, int count, std::uint64_t seed,
                                     std::uint64_t max_tries_per_point = 100000) {
  std::vector<HPoint<N>> out;
  out.reserve(static_cast<std::size_t>(count));
  Rng rng = derive_rng(seed, 0x73657473ULL);
  const Ball<N>& b = s.bound;
  std::uint64_t tries = 0;
  while (out.size() < static_cast<std::size_t>(count)) {
    if (++tries > max_tries_per_point * static_cast<std::uint64_t>(count))
      throw std::runtime_error("sample_in_set: membership acceptance collapsed for " + s.label);
    HPoint<N> u;
    for (int j = 0; j < N; ++j) u.z[j] = cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    u.t = rng.uniform(-1.0, 1.0);
    if (!(koranyi_norm<N>(u) < 1.0)) continue;
    const HPoint<N> x = multiply(b.center, dilate<N>(b.radius, u));
    if (s.contains(x)) out.push_back(x);
  }
  return out;
}

template <int N>
struct PairEstimate {
  double value = 0.0;
  HPoint<N> a{}, b{};  // witness pair
  int points_used = 0;
};

namespace detail_sets {

// Local improvement around the current witness pair: jitter each endpoint inside its set
// with a shrinking coordinate scale, keep strict improvements only.
template <int N>
void refine_pair(PairEstimate<N>& best, const MeasurableSet<N>& sa, const MeasurableSet<N>& sb,
                 const MetricContext<N>& ctx, bool maximize, int rounds, int probes, Rng& rng) {
  double scale = 0.15;
  for (int round = 0; round < rounds; ++round, scale *= 0.4) {
    for (int i = 0; i < probes; ++i) {
      const bool move_a = (i % 2) == 0;
      const MeasurableSet<N>& s = move_a ? sa : sb;
      const HPoint<N>& base = move_a ? best.a : best.b;
      HPoint<N> cand = base;
      const double h = scale * s.bound.radius;
      for (int j = 0; j < N; ++j) cand.z[j] += cplx(h * rng.normal(), h * rng.normal());
      cand.t += h * h * rng.normal();
      if (!s.contains(cand)) continue;
      const double d = move_a ? ctx.distance(cand, best.b) : ctx.distance(best.a, cand);
      if (maximize ? d > best.value : d < best.value) {
        best.value = d;
        (move_a ? best.a : best.b) = cand;
      }
    }
  }
}

}  // namespace detail_sets

// Max pairwise distance over sampled points: a lower bound of the true diameter.
template <int N>
PairEstimate<N> set_diameter_estimate(const MeasurableSet<N>& s, int point_budget, std::uint64_t seed,
                                      const MetricContext<N>& ctx = {}, int refine_rounds = 3) {
  const int k = std::max(2, point_budget);
  auto pts = sample_in_set<N>(s, k, mix_bits(seed, 0xd1a3));
  PairEstimate<N> best;
  best.value = -1.0;
  best.points_used = k;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = ctx.distance(pts[i], pts[j]);
      if (d > best.value) {
        best.value = d;
        best.a = pts[i];
        best.b = pts[j];
      }
    }
  Rng rng = derive_rng(seed, 0xd1a4);
  detail_sets::refine_pair<N>(best, s, s, ctx, true, refine_rounds, 48, rng);
  return best;
}

// Min cross distance over sampled pairs: an upper bound of the true set distance.
template <int N>
PairEstimate<N> set_distance_estimate(const MeasurableSet<N>& s1, const MeasurableSet<N>& s2,
                                      int point_budget, std::uint64_t seed, const MetricContext<N>& ctx = {},
                                      int refine_rounds = 3) {
  const int k = std::max(2, point_budget);
  auto p1 = sample_in_set<N>(s1, k, mix_bits(seed, 0xd157));
  auto p2 = sample_in_set<N>(s2, k, mix_bits(seed, 0xd158));
  PairEstimate<N> best;
  best.value = std::numeric_limits<double>::infinity();
  best.points_used = 2 * k;
  for (const auto& a : p1)
    for (const auto& b : p2) {
      const double d = ctx.distance(a, b);
      if (d < best.value) {
        best.value = d;
        best.a = a;
        best.b = b;
      }
    }
  Rng rng = derive_rng(seed, 0xd159);
  detail_sets::refine_pair<N>(best, s1, s2, ctx, false, refine_rounds, 48, rng);
  return best;
}

}  // namespace heis
