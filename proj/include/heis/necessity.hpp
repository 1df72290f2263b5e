#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hom.hpp"
#include "maps.hpp"
#include "metrics.hpp"
#include "qc.hpp"

namespace heis {

// Separated-sets construction at scale r for a homogeneous hom L:
//   v = argmax of d(L(.), 0) on the unit sphere, x = delta_{(15/16) r}(v),
//   E1 = B(x, r/16), E2 = B(0, r/16).
// The measured quantities carry favorable one-sided biases: the sampled set distance
// upper-bounds the truth while the chain lower-bounds it, and the sampled diameter
// lower-bounds the truth while the chain upper-bounds it, so the inequality checks are
// rigorous up to the tiny slack in the lambda estimate.
template <int N>
struct NecessityConstruction {
  double r = 0.0;
  LambdaSearch<N> lambda{};
  HPoint<N> x{};
  Ball<N> e1{}, e2{};
  double dist = 0.0;           // min over sampled pairs of d(L(a), L(b))
  double diam = 0.0;           // max over sampled pairs within L(B(0, r))
  double min_pairwise = 0.0;   // same minimum, kept explicit for the pointwise assertion
  std::uint64_t pairs = 0;
  RoundnessEstimate roundness{};
  double tol = 0.0;
  bool pointwise_ok = false;        // every sampled pair >= (13/16) r lambda - tol
  bool dist_ge_three_quarters = false;  // dist >= (3/4) r lambda - tol
  bool dist_ge_diam_bound = false;      // dist >= (3/8) diam - tol
};

struct NecessityBudgets {
  int lambda_samples = 2000;
  int lambda_refine_rounds = 10;
  int set_points = 100;   // per set; pairwise checks cover set_points^2 pairs
  int diam_points = 160;
  std::uint64_t volume_samples = 200000;
  int refine_rounds = 3;
};

namespace detail_necessity {

// Jitter a point of a Koranyi ball and clamp it back via the increment dilation; for CC
// balls membership is re-checked instead (no exact projection available).
template <int N>
std::pair<bool, HPoint<N>> jitter_in_ball(const HPoint<N>& p, const Ball<N>& ball, double scale,
                                          Rng& rng, const MetricContext<N>& ctx) {
  HPoint<N> cand = p;
  const double h = scale * ball.radius;
  for (int j = 0; j < N; ++j) cand.z[j] += cplx(h * rng.normal(), h * rng.normal());
  cand.t += h * h * rng.normal();
  HPoint<N> w = left_difference<N>(ball.center, cand);
  if (ball.metric == Metric::Koranyi) {
    const double n = koranyi_norm<N>(w);
    if (n > ball.radius) cand = multiply(ball.center, dilate<N>(ball.radius / n, w));
    return {true, cand};
  }
  MetricContext<N> mctx = ctx;
  mctx.metric = ball.metric;
  return {mctx.norm(w) <= ball.radius, cand};
}

}  // namespace detail_necessity

template <int N>
NecessityConstruction<N> necessity_construction(const HomogeneousHom<N>& L, double r,
                                                const NecessityBudgets& budgets, std::uint64_t seed,
                                                const MetricContext<N>& ctx = {}) {
  if (!(r > 0.0)) throw std::invalid_argument("necessity_construction: r must be positive");
  NecessityConstruction<N> out;
  out.r = r;
  out.lambda = lambda_max_search<N>(L, budgets.lambda_samples, budgets.lambda_refine_rounds,
                                    mix_bits(seed, 0xec100001ULL));
  if (!(out.lambda.value > 0.0)) throw std::runtime_error("necessity_construction: lambda search failed");
  out.x = dilate<N>((15.0 / 16.0) * r, out.lambda.dir);
  out.e1 = Ball<N>{out.x, r / 16.0, ctx.metric};
  out.e2 = Ball<N>{HPoint<N>::identity(), r / 16.0, ctx.metric};

  auto apply = [&L](const HPoint<N>& p) { return hom_apply<N>(L, p); };

  // set distance: min over all sampled E1 x E2 pairs of the image distance, then pushed
  // down by in-domain refinement; every evaluated pair feeds the pointwise assertion
  auto a_pts = ball_sample_interior<N>(out.e1, budgets.set_points, mix_bits(seed, 0xec100002ULL), ctx).points;
  auto b_pts = ball_sample_interior<N>(out.e2, budgets.set_points, mix_bits(seed, 0xec100003ULL), ctx).points;
  double dmin = std::numeric_limits<double>::infinity();
  HPoint<N> wa{}, wb{};
  for (const auto& a : a_pts)
    for (const auto& b : b_pts) {
      const double d = ctx.distance(apply(a), apply(b));
      ++out.pairs;
      if (d < dmin) {
        dmin = d;
        wa = a;
        wb = b;
      }
    }
  Rng rng = derive_rng(seed, 0xec100004ULL);
  double scale = 0.2;
  for (int round = 0; round < budgets.refine_rounds; ++round, scale *= 0.4) {
    for (int probe = 0; probe < 48; ++probe) {
      const bool move_a = (probe % 2) == 0;
      const auto [ok, cand] =
          detail_necessity::jitter_in_ball<N>(move_a ? wa : wb, move_a ? out.e1 : out.e2, scale, rng, ctx);
      if (!ok) continue;
      const double d = move_a ? ctx.distance(apply(cand), apply(wb)) : ctx.distance(apply(wa), apply(cand));
      ++out.pairs;
      if (d < dmin) {
        dmin = d;
        (move_a ? wa : wb) = cand;
      }
    }
  }
  out.dist = dmin;
  out.min_pairwise = dmin;

  // image diameter of B(0, r): max over mapped sample pairs, refined in the domain
  const Ball<N> big{HPoint<N>::identity(), r, ctx.metric};
  std::vector<HPoint<N>> domain =
      sphere_sample<N>(HPoint<N>::identity(), r, budgets.diam_points / 2, mix_bits(seed, 0xec100005ULL), ctx);
  {
    auto inner = ball_sample_interior<N>(big, budgets.diam_points - budgets.diam_points / 2,
                                         mix_bits(seed, 0xec100006ULL), ctx);
    domain.insert(domain.end(), inner.points.begin(), inner.points.end());
  }
  std::vector<HPoint<N>> mapped(domain.size());
  for (std::size_t i = 0; i < domain.size(); ++i) mapped[i] = apply(domain[i]);
  double dmax = -1.0;
  HPoint<N> da{}, db{};
  for (std::size_t i = 0; i < mapped.size(); ++i)
    for (std::size_t j = i + 1; j < mapped.size(); ++j) {
      const double d = ctx.distance(mapped[i], mapped[j]);
      if (d > dmax) {
        dmax = d;
        da = domain[i];
        db = domain[j];
      }
    }
  scale = 0.2;
  for (int round = 0; round < budgets.refine_rounds; ++round, scale *= 0.4) {
    for (int probe = 0; probe < 48; ++probe) {
      const bool move_a = (probe % 2) == 0;
      const auto [ok, cand] = detail_necessity::jitter_in_ball<N>(move_a ? da : db, big, scale, rng, ctx);
      if (!ok) continue;
      const double d = move_a ? ctx.distance(apply(cand), apply(db)) : ctx.distance(apply(da), apply(cand));
      if (d > dmax) {
        dmax = d;
        (move_a ? da : db) = cand;
      }
    }
  }
  out.diam = dmax;

  out.roundness = roundness_ratio<N>(L, r, budgets.volume_samples, budgets.diam_points,
                                     mix_bits(seed, 0xec100007ULL), ctx);

  const double lam = out.lambda.value;
  out.tol = 1e-9 * std::max(1.0, r * lam);
  out.pointwise_ok = out.min_pairwise >= (13.0 / 16.0) * r * lam - out.tol;
  out.dist_ge_three_quarters = out.dist >= 0.75 * r * lam - out.tol;
  out.dist_ge_diam_bound = out.dist >= (3.0 / 8.0) * out.diam - out.tol;
  return out;
}

// Map-at-scale analog of the extremal search: argmax of d(f(delta_r v), f(0)) / r over
// the unit sphere. Used to build necessity-style set pairs for maps that are not homs.
template <int N>
LambdaSearch<N> map_scale_lambda_search(const MapDescriptor<N>& f, double r, int samples,
                                        int refine_rounds, std::uint64_t seed,
                                        const MetricContext<N>& ctx = {}) {
  LambdaSearch<N> out;
  const HPoint<N> f0 = f(HPoint<N>::identity());
  auto consider = [&](const HPoint<N>& v) {
    ++out.evaluations;
    const double d = ctx.distance(f0, f(dilate<N>(r, v))) / r;
    if (d > out.value) {
      out.value = d;
      out.dir = v;
    }
  };
  Rng rng = derive_rng(seed, 0x3a9da000ULL);
  HPoint<N> e1;
  e1.z[0] = cplx(1.0, 0.0);
  consider(e1);
  HPoint<N> up;
  up.t = 1.0;
  consider(up);
  up.t = -1.0;
  consider(up);
  for (int i = 0; i < samples; ++i) consider(unit_koranyi_direction<N>(rng));
  double sigma = 0.3;
  for (int round = 0; round < std::max(1, refine_rounds); ++round, sigma *= 0.5)
    for (int p = 0; p < 32; ++p) consider(detail_qc::jitter_direction<N>(out.dir, sigma, rng));
  return out;
}

// Necessity-style domain ball pair for an arbitrary map at scale r.
template <int N>
std::pair<Ball<N>, Ball<N>> necessity_pair_for_map(const MapDescriptor<N>& f, double r, int samples,
                                                   std::uint64_t seed, const MetricContext<N>& ctx = {}) {
  const LambdaSearch<N> lam = map_scale_lambda_search<N>(f, r, samples, 6, seed, ctx);
  const HPoint<N> x = dilate<N>((15.0 / 16.0) * r, lam.dir);
  return {Ball<N>{x, r / 16.0, ctx.metric}, Ball<N>{HPoint<N>::identity(), r / 16.0, ctx.metric}};
}

}  // namespace heis
