#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bmo.hpp"
#include "fields.hpp"
#include "hom.hpp"
#include "maps.hpp"
#include "measure.hpp"
#include "metrics.hpp"
#include "sets.hpp"
#include "stats.hpp"

namespace heis {

namespace detail_qc {

// Point at metric distance r from center in direction w (unit Koranyi); CC radii are
// corrected through homogeneity of the estimated distance.
template <int N>
HPoint<N> at_radius(const HPoint<N>& center, const HPoint<N>& w, double r, const MetricContext<N>& ctx) {
  double s = r;
  if (ctx.metric == Metric::CC) {
    const double d = ctx.norm(w);
    if (!(d > 0.0)) throw std::runtime_error("at_radius: degenerate direction");
    s = r / d;
  }
  return multiply(center, dilate<N>(s, w));
}

template <int N>
HPoint<N> jitter_direction(const HPoint<N>& w, double sigma, Rng& rng) {
  HPoint<N> v = w;
  for (int j = 0; j < N; ++j) v.z[j] += cplx(sigma * rng.normal(), sigma * rng.normal());
  v.t += sigma * rng.normal();
  const double s = koranyi_norm<N>(v);
  if (!(s > 1e-12)) return w;
  return dilate<N>(1.0 / s, v);
}

// Fixed unit-Koranyi probe directions (first coordinate plane + center); used to match
// image ball radii to a map's local scale factor.
template <int N>
std::vector<HPoint<N>> probe_directions() {
  std::vector<HPoint<N>> dirs;
  const double s = 1.0 / std::sqrt(2.0);
  for (const cplx& z0 : {cplx(1, 0), cplx(-1, 0), cplx(0, 1), cplx(0, -1), cplx(s, s), cplx(-s, -s)}) {
    HPoint<N> v;
    v.z[0] = z0;
    dirs.push_back(v);
  }
  HPoint<N> up, dn;
  up.t = 1.0;
  dn.t = -1.0;
  dirs.push_back(up);
  dirs.push_back(dn);
  return dirs;
}

}  // namespace detail_qc

// Radius of a metric ball around f(c) matched to the image of B(c, r): the median of
// the probe-image distances. Exactly r for isometries, lambda r for dilations.
template <int N>
double probe_image_radius(const MapDescriptor<N>& f, const HPoint<N>& c, double r,
                          const MetricContext<N>& ctx = {}) {
  const HPoint<N> fc = f(c);
  std::vector<double> ds;
  for (const auto& v : detail_qc::probe_directions<N>()) {
    const double d = ctx.distance(fc, f(detail_qc::at_radius<N>(c, v, r, ctx)));
    if (std::isfinite(d)) ds.push_back(d);
  }
  if (ds.empty()) throw std::runtime_error("probe_image_radius: no finite probe images");
  std::sort(ds.begin(), ds.end());
  const double med = ds[ds.size() / 2];
  if (!(med > 0.0)) throw std::runtime_error("probe_image_radius: degenerate image scale");
  return med;
}

// Image of a set under an invertible map: membership through the inverse, bounding ball
// from probe distances with a safety factor (the bound only steers rejection samplers;
// membership stays exact).
template <int N>
MeasurableSet<N> image_set(const MapDescriptor<N>& f, const MeasurableSet<N>& s) {
  if (!f.inverse) throw std::invalid_argument("image_set: map '" + f.id + "' has no inverse");
  MeasurableSet<N> out;
  out.label = f.id + "(" + s.label + ")";
  auto finv = f.inverse;
  auto inner = s.contains;
  out.contains = [finv, inner](const HPoint<N>& y) { return inner(finv(y)); };
  const HPoint<N> fc = f(s.bound.center);
  double rmax = 0.0;
  for (const auto& v : detail_qc::probe_directions<N>())
    rmax = std::max(rmax, koranyi_distance<N>(fc, f(detail_qc::at_radius<N>(s.bound.center, v, s.bound.radius, MetricContext<N>{}))));
  out.bound = Ball<N>{fc, std::max(rmax * 2.5, 1e-12), Metric::Koranyi};
  return out;
}

// ---------------------------------------------------------------------------
// distortion

template <int N>
struct DistortionEstimate {
  double k = std::numeric_limits<double>::infinity();
  double sup_d = 0.0;  // sampled sup is a lower bound of the true sup
  double inf_d = std::numeric_limits<double>::infinity();  // sampled inf upper-bounds the true inf
  double r = 0.0;
  bool collision = false;  // inf collapsed to ~0: non-injectivity at this scale
  std::uint64_t samples = 0;
  int refine_rounds = 0;
};

// Deterministic stratified unit-sphere grid: per complex axis, phases x vertical levels
// with |z|^4 + t^2 = 1, plus the central pair. Every axis carries points with t = 0 and
// Im z = 0, so generic horizontal rays are always represented.
template <int N>
std::vector<HPoint<N>> distortion_directions(int sphere_samples) {
  constexpr int phases = 8;
  int levels = std::max(3, sphere_samples / (phases * N));
  if (levels % 2 == 0) ++levels;
  std::vector<HPoint<N>> dirs;
  dirs.reserve(static_cast<std::size_t>(N) * phases * static_cast<std::size_t>(levels) + 2);
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < levels; ++k) {
      const double wt = -1.0 + 2.0 * k / (levels - 1);
      const double a = std::pow(std::max(0.0, 1.0 - wt * wt), 0.25);
      if (a == 0.0) continue;
      for (int m = 0; m < phases; ++m) {
        HPoint<N> w{};
        w.z[j] = std::polar(a, 2.0 * M_PI * m / phases);
        w.t = wt;
        dirs.push_back(w);
      }
    }
  HPoint<N> up{}, dn{};
  up.t = 1.0;
  dn.t = -1.0;
  dirs.push_back(up);
  dirs.push_back(dn);
  return dirs;
}

// K_f(x, r) from sphere images over the stratified grid, with seeded jitter refinement of
// the sup witness. The reported K is a lower bound of the true K_f(x, r): the sampled sup
// under-estimates and the sampled inf over-estimates. The inf is deliberately not refined:
// descending it chases thin cancellation sets whose sampled depth is jitter luck, which
// destabilizes the ratio without making the bound any more valid.
template <int N>
DistortionEstimate<N> distortion(const MapDescriptor<N>& f, const HPoint<N>& x, double r,
                                 int sphere_samples, int refine_rounds, std::uint64_t seed,
                                 const MetricContext<N>& ctx = {}) {
  if (!(r > 0.0)) throw std::invalid_argument("distortion: radius must be positive");
  const HPoint<N> fx = f(x);
  Rng rng = derive_rng(seed, 0xd1570000ULL);
  HPoint<N> wmax{};
  double dmax = -1.0, dmin = std::numeric_limits<double>::infinity();
  const std::vector<HPoint<N>> dirs = distortion_directions<N>(sphere_samples);
  for (const auto& w : dirs) {
    const double d = ctx.distance(fx, f(detail_qc::at_radius<N>(x, w, r, ctx)));
    if (d > dmax) {
      dmax = d;
      wmax = w;
    }
    dmin = std::min(dmin, d);
  }
  double sigma = 0.05;
  for (int round = 0; round < refine_rounds; ++round, sigma *= 0.5) {
    for (int p = 0; p < 16; ++p) {
      const HPoint<N> w = detail_qc::jitter_direction<N>(wmax, sigma, rng);
      const double d = ctx.distance(fx, f(detail_qc::at_radius<N>(x, w, r, ctx)));
      if (d > dmax) {
        dmax = d;
        wmax = w;
      }
    }
  }
  DistortionEstimate<N> out;
  out.sup_d = dmax;
  out.inf_d = dmin;
  out.r = r;
  out.samples = static_cast<std::uint64_t>(dirs.size());
  out.refine_rounds = refine_rounds;
  out.collision = !(dmin > 1e-14 * r);
  out.k = out.collision ? std::numeric_limits<double>::infinity() : dmax / dmin;
  return out;
}

template <int N>
struct DistortionProfile {
  HPoint<N> x{};
  std::vector<double> radii;
  std::vector<DistortionEstimate<N>> per_radius;
  double slope = 0.0;  // log K vs log r over the last decade of the ladder
};

template <int N>
struct QcProfileReport {
  std::vector<DistortionProfile<N>> profiles;
  double plateau = 0.0;  // max K over the last-decade rungs across base points
  double k_threshold = 0.0;
  bool qc_consistent = false;
  bool not_qc = false;  // some point with growth slope <= -0.2 across the last decade
};

template <int N>
std::vector<HPoint<N>> default_qc_basepoints(int count, std::uint64_t seed) {
  std::vector<HPoint<N>> pts;
  Rng rng = derive_rng(seed, 0xba5e0000ULL);
  for (int i = 0; i < count; ++i) {
    HPoint<N> p;
    for (int j = 0; j < N; ++j) p.z[j] = cplx(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
    p.t = rng.uniform(-4.0, 4.0);
    pts.push_back(p);
  }
  return pts;
}

inline std::vector<double> default_qc_ladder() {
  std::vector<double> rs;
  for (int e = 2; e <= 8; ++e) rs.push_back(std::pow(2.0, -e));
  return rs;
}

template <int N>
QcProfileReport<N> qc_profile(const MapDescriptor<N>& f, const std::vector<HPoint<N>>& points,
                              const std::vector<double>& radii, int sphere_samples, int refine_rounds,
                              std::uint64_t seed, const MetricContext<N>& ctx = {},
                              double k_threshold = 50.0) {
  if (points.empty() || radii.empty()) throw std::invalid_argument("qc_profile: need points and radii");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] < radii[i - 1])) throw std::invalid_argument("qc_profile: radius ladder must decrease");

  QcProfileReport<N> rep;
  rep.k_threshold = k_threshold;
  rep.profiles.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    rep.profiles[i].x = points[i];
    rep.profiles[i].radii = radii;
    rep.profiles[i].per_radius.resize(radii.size());
  }
  const std::size_t nr = radii.size();
  parallel_for(points.size() * nr, [&](std::size_t k) {
    const std::size_t i = k / nr, j = k % nr;
    rep.profiles[i].per_radius[j] =
        distortion<N>(f, points[i], radii[j], sphere_samples, refine_rounds, mix_bits(seed, 0xd1570000ULL + k), ctx);
  });

  const double decade_hi = radii.back() * 10.0;
  double plateau = 0.0;
  bool any_decay = false;
  for (auto& prof : rep.profiles) {
    std::vector<double> lx, ly;
    for (std::size_t j = 0; j < nr; ++j) {
      if (radii[j] > decade_hi) continue;
      const double k = prof.per_radius[j].k;
      plateau = std::max(plateau, k);
      if (std::isfinite(k) && k > 0.0) {
        lx.push_back(std::log(radii[j]));
        ly.push_back(std::log(k));
      }
    }
    prof.slope = lx.size() >= 2 ? linear_fit(lx, ly).slope : std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(prof.slope) && prof.slope <= -0.2) any_decay = true;
  }
  rep.plateau = plateau;
  rep.not_qc = any_decay;
  rep.qc_consistent = !any_decay && plateau <= k_threshold;
  return rep;
}

// ---------------------------------------------------------------------------
// extremal stretch of a homogeneous hom over the unit sphere

template <int N>
struct LambdaSearch {
  double value = 0.0;
  HPoint<N> dir{};  // argmax direction on the unit Koranyi sphere
  std::uint64_t evaluations = 0;
};

// max_{|v|=1} d(L(v), 0) by sampling plus local polish plus two structured candidate
// families (the center direction and the top singular direction of A via power
// iteration). Every candidate is evaluated through the functional itself, so the result
// is a lower bound of the true maximum that is machine-exact for homs whose extremum
// sits in one of those families.
template <int N>
LambdaSearch<N> lambda_max_search(const HomogeneousHom<N>& L, int samples, int refine_rounds,
                                  std::uint64_t seed) {
  LambdaSearch<N> out;
  auto value = [&L](const HPoint<N>& v) { return koranyi_norm<N>(hom_apply<N>(L, v)); };
  auto consider = [&](const HPoint<N>& v) {
    ++out.evaluations;
    const double d = value(v);
    if (d > out.value) {
      out.value = d;
      out.dir = v;
    }
  };

  Rng rng = derive_rng(seed, 0x1a3da000ULL);
  HPoint<N> e1;
  e1.z[0] = cplx(1.0, 0.0);
  consider(e1);
  for (int i = 0; i < samples; ++i) consider(unit_koranyi_direction<N>(rng));
  double sigma = 0.3;
  for (int round = 0; round < std::max(1, refine_rounds); ++round, sigma *= 0.5)
    for (int p = 0; p < 32; ++p) consider(detail_qc::jitter_direction<N>(out.dir, sigma, rng));

  HPoint<N> up;
  up.t = 1.0;
  consider(up);
  up.t = -1.0;
  consider(up);

  // power iteration on A^T A: horizontal extremal direction
  constexpr int d = 2 * N;
  std::array<double, d> v{};
  for (int i = 0; i < d; ++i) v[i] = 1.0 / std::sqrt(static_cast<double>(d));
  for (int it = 0; it < 80; ++it) {
    std::array<double, d> av{}, bv{};
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) av[r] += L.a(r, c) * v[c];
    for (int c = 0; c < d; ++c)
      for (int r = 0; r < d; ++r) bv[c] += L.a(r, c) * av[r];
    double nn = 0.0;
    for (int i = 0; i < d; ++i) nn += bv[i] * bv[i];
    nn = std::sqrt(nn);
    if (!(nn > 0.0)) break;
    for (int i = 0; i < d; ++i) v[i] = bv[i] / nn;
  }
  HPoint<N> hv;
  for (int j = 0; j < N; ++j) hv.z[j] = cplx(v[j], v[N + j]);
  const double hn = koranyi_norm<N>(hv);
  if (hn > 1e-12) consider(dilate<N>(1.0 / hn, hv));

  return out;
}

// ---------------------------------------------------------------------------
// roundness

struct RoundnessEstimate {
  double ratio = 0.0;
  double volume = 0.0;
  double volume_sigma = 0.0;
  double diam = 0.0;
  std::uint64_t volume_samples = 0;
  int diam_points = 0;
};

// |f(B(0,r))| / diam(f(B(0,r)))^{2n+2}. Volume through the constant Jacobian when the
// catalog knows it (change of variables; the MC part estimates |B(0,r)|), otherwise by
// membership MC through the inverse. Diameter from mapped sphere/interior samples with
// in-domain refinement, so it never exceeds the true diameter.
template <int N>
RoundnessEstimate roundness_ratio(const MapDescriptor<N>& f, double r, std::uint64_t volume_samples,
                                  int diam_points, std::uint64_t seed, const MetricContext<N>& ctx = {}) {
  if (!(r > 0.0)) throw std::invalid_argument("roundness_ratio: radius must be positive");
  const Ball<N> ball{HPoint<N>::identity(), r, ctx.metric};
  RoundnessEstimate out;
  out.volume_samples = volume_samples;
  out.diam_points = diam_points;

  if (std::isfinite(f.jacobian)) {
    const VolumeEstimate v = ball_volume_estimate<N>(ball, volume_samples, mix_bits(seed, 0x201), ctx);
    out.volume = f.jacobian * v.value;
    out.volume_sigma = f.jacobian * v.sigma;
  } else if (f.inverse) {
    const MeasurableSet<N> img = image_set<N>(f, set_from_ball<N>(ball, ctx));
    const VolumeEstimate v = set_volume_estimate<N>(img, volume_samples, mix_bits(seed, 0x202));
    out.volume = v.value;
    out.volume_sigma = v.sigma;
  } else {
    throw std::invalid_argument("roundness_ratio: map '" + f.id + "' has neither Jacobian nor inverse");
  }

  const int k = std::max(4, diam_points);
  std::vector<HPoint<N>> domain = sphere_sample<N>(HPoint<N>::identity(), r, k / 2, mix_bits(seed, 0x203), ctx);
  {
    auto inner = ball_sample_interior<N>(ball, k - k / 2, mix_bits(seed, 0x204), ctx);
    domain.insert(domain.end(), inner.points.begin(), inner.points.end());
  }
  std::vector<HPoint<N>> mapped(domain.size());
  for (std::size_t i = 0; i < domain.size(); ++i) mapped[i] = f(domain[i]);
  std::size_t ia = 0, ib = 1;
  double diam = -1.0;
  for (std::size_t i = 0; i < mapped.size(); ++i)
    for (std::size_t j = i + 1; j < mapped.size(); ++j) {
      const double dd = ctx.distance(mapped[i], mapped[j]);
      if (dd > diam) {
        diam = dd;
        ia = i;
        ib = j;
      }
    }
  // refine the witness pair by jittering in the domain and clamping back into the ball
  Rng rng = derive_rng(seed, 0x205);
  HPoint<N> a = domain[ia], b = domain[ib];
  auto clamp_ball = [&](HPoint<N> p) -> std::pair<bool, HPoint<N>> {
    if (ctx.metric == Metric::Koranyi) {
      const double n = koranyi_norm<N>(p);
      if (n > r) p = dilate<N>(r / n, p);
      return {true, p};
    }
    return {ctx.norm(p) <= r, p};
  };
  double scale = 0.15;
  for (int round = 0; round < 3; ++round, scale *= 0.4) {
    for (int probe = 0; probe < 32; ++probe) {
      const bool move_a = (probe % 2) == 0;
      HPoint<N> cand = move_a ? a : b;
      for (int j = 0; j < N; ++j) cand.z[j] += cplx(scale * r * rng.normal(), scale * r * rng.normal());
      cand.t += scale * scale * r * r * rng.normal();
      const auto [ok, proj] = clamp_ball(cand);
      if (!ok) continue;
      const double dd = move_a ? ctx.distance(f(proj), f(b)) : ctx.distance(f(a), f(proj));
      if (dd > diam) {
        diam = dd;
        (move_a ? a : b) = proj;
      }
    }
  }
  if (!(diam > 0.0)) throw std::runtime_error("roundness_ratio: degenerate image (zero diameter)");
  out.diam = diam;
  out.ratio = out.volume / std::pow(diam, 2 * N + 2);
  return out;
}

template <int N>
RoundnessEstimate roundness_ratio(const HomogeneousHom<N>& L, double r, std::uint64_t volume_samples,
                                  int diam_points, std::uint64_t seed, const MetricContext<N>& ctx = {}) {
  return roundness_ratio<N>(map_from_hom<N>(L), r, volume_samples, diam_points, seed, ctx);
}

struct RoundnessLiminf {
  std::vector<double> radii;
  std::vector<RoundnessEstimate> per_radius;
  double liminf_surrogate = 0.0;  // running minimum along the shrinking ladder
  double threshold = 0.0;
  bool heuristic_pass = false;  // declared heuristic: surrogate >= threshold
};

// liminf_{r->0} roundness surrogate along a decreasing ladder; the verdict compares the
// running minimum against a configurable fraction of a reference (identity) roundness.
template <int N>
RoundnessLiminf roundness_liminf(const MapDescriptor<N>& f, const std::vector<double>& radii,
                                 std::uint64_t volume_samples, int diam_points, std::uint64_t seed,
                                 double rho0_ref, const MetricContext<N>& ctx = {},
                                 double threshold_factor = 0.5) {
  if (radii.empty()) throw std::invalid_argument("roundness_liminf: empty ladder");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] < radii[i - 1])) throw std::invalid_argument("roundness_liminf: ladder must decrease");
  RoundnessLiminf out;
  out.radii = radii;
  out.per_radius.resize(radii.size());
  parallel_for(radii.size(), [&](std::size_t i) {
    out.per_radius[i] = roundness_ratio<N>(f, radii[i], volume_samples, diam_points,
                                           mix_bits(seed, 0x20600000ULL + i), ctx);
  });
  double running = std::numeric_limits<double>::infinity();
  for (const auto& e : out.per_radius) running = std::min(running, e.ratio);
  out.liminf_surrogate = running;
  out.threshold = threshold_factor * rho0_ref;
  out.heuristic_pass = out.liminf_surrogate >= out.threshold;
  return out;
}

// ---------------------------------------------------------------------------
// Gotoh density functional

template <int N>
struct GotohFunctional {
  double value = 0.0;  // sup over the family of min_i density(E_i, B); in [0,1]
  double sigma = 0.0;  // MC sigma of the selected density at the argmax ball
  Ball<N> argmax{};
  std::size_t balls = 0;
};

template <int N>
GotohFunctional<N> gotoh_functional(const MeasurableSet<N>& e1, const MeasurableSet<N>& e2,
                                    const std::vector<Ball<N>>& family, std::uint64_t samples_per_ball,
                                    std::uint64_t seed, const MetricContext<N>& ctx = {}) {
  if (family.empty()) throw std::invalid_argument("gotoh_functional: empty ball family");
  std::vector<double> vals(family.size()), sigs(family.size());
  parallel_for(family.size(), [&](std::size_t i) {
    const std::uint64_t s = ball_stream<N>(seed, family[i]);
    const DensityEstimate d1 = density_in_ball<N>(e1.contains, family[i], samples_per_ball, mix_bits(s, 1), ctx);
    const DensityEstimate d2 = density_in_ball<N>(e2.contains, family[i], samples_per_ball, mix_bits(s, 2), ctx);
    if (d1.density <= d2.density) {
      vals[i] = d1.density;
      sigs[i] = d1.sigma;
    } else {
      vals[i] = d2.density;
      sigs[i] = d2.sigma;
    }
  });
  GotohFunctional<N> out;
  out.balls = family.size();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < family.size(); ++i)
    if (vals[i] > vals[arg]) arg = i;
  out.value = vals[arg];
  out.sigma = sigs[arg];
  out.argmax = family[arg];
  return out;
}

// Default family honoring the construction hints: it contains the ball B(0, r0) around
// both sets and balls centered between E1 and E2 with radii at least their separation.
template <int N>
std::vector<Ball<N>> default_gotoh_family(const Ball<N>& b1, const Ball<N>& b2,
                                          const MetricContext<N>& ctx = {}) {
  const double r0 = std::max(ctx.norm(b1.center) + b1.radius, ctx.norm(b2.center) + b2.radius);
  const double sep = ctx.distance(b1.center, b2.center);
  const double d = std::max(sep, 0.5 * (b1.radius + b2.radius));
  const HPoint<N> mid = multiply(b1.center, dilate<N>(0.5, left_difference<N>(b1.center, b2.center)));
  std::vector<Ball<N>> fam;
  fam.push_back(Ball<N>{HPoint<N>::identity(), std::max(r0, 1e-9), ctx.metric});
  fam.push_back(Ball<N>{mid, d, ctx.metric});
  fam.push_back(Ball<N>{mid, 2.0 * d, ctx.metric});
  fam.push_back(Ball<N>{mid, 4.0 * d, ctx.metric});
  fam.push_back(Ball<N>{b1.center, d, ctx.metric});
  fam.push_back(Ball<N>{b2.center, d, ctx.metric});
  return fam;
}

struct GotohGrid {
  std::vector<double> ks;
  std::vector<double> alphas;
};

inline GotohGrid default_gotoh_grid() {
  GotohGrid g;
  for (int e = 0; e <= 10; ++e) g.ks.push_back(std::pow(2.0, e));
  g.alphas = {1.0, 0.5, 0.25, 0.125};
  return g;
}

template <int N>
struct GotohPairReport {
  GotohFunctional<N> left;   // domain-side functional
  GotohFunctional<N> right;  // image-side functional
  bool sat = false;          // some grid point satisfies left <= K right^alpha (with MC slack)
  double k = 0.0;
  double alpha = 0.0;
};

template <int N>
struct GotohPair {
  MeasurableSet<N> e1, e2;
  std::vector<Ball<N>> family;
};

// left <= K right^alpha over a fixed grid, with the right side inflated and the left
// side slackened by 4 MC sigmas so exact equality cases (identity) are judged fairly.
// UNSAT within the grid is reported as inconclusive, never as a disproof.
template <int N>
std::vector<GotohPairReport<N>> gotoh_check(const MapDescriptor<N>& f, const std::vector<GotohPair<N>>& pairs,
                                            std::uint64_t samples_per_ball, std::uint64_t seed,
                                            const MetricContext<N>& ctx = {},
                                            const GotohGrid& grid = default_gotoh_grid()) {
  if (!f.inverse) throw std::invalid_argument("gotoh_check: map must be invertible");
  std::vector<GotohPairReport<N>> reports;
  for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
    const auto& pr = pairs[pi];
    GotohPairReport<N> rep;
    rep.left = gotoh_functional<N>(pr.e1, pr.e2, pr.family, samples_per_ball,
                                   mix_bits(seed, 0x90700000ULL + 2 * pi), ctx);

    const MeasurableSet<N> f1 = image_set<N>(f, pr.e1);
    const MeasurableSet<N> f2 = image_set<N>(f, pr.e2);
    std::vector<Ball<N>> image_family;
    image_family.reserve(pr.family.size());
    for (const auto& b : pr.family)
      image_family.push_back(Ball<N>{f(b.center), probe_image_radius<N>(f, b.center, b.radius, ctx), b.metric});
    rep.right = gotoh_functional<N>(f1, f2, image_family, samples_per_ball,
                                    mix_bits(seed, 0x90700000ULL + 2 * pi + 1), ctx);

    const double lhs = rep.left.value - 4.0 * rep.left.sigma;
    const double rhs_base = std::min(1.0, rep.right.value + 4.0 * rep.right.sigma);
    for (double k : grid.ks) {
      for (double a : grid.alphas)
        if (lhs <= k * std::pow(rhs_base, a)) {
          rep.sat = true;
          rep.k = k;
          rep.alpha = a;
          break;
        }
      if (rep.sat) break;
    }
    reports.push_back(rep);
  }
  return reports;
}

// ---------------------------------------------------------------------------
// BMO transfer

template <int N>
struct TransferReport {
  double ratio = 0.0;
  double base_norm = 0.0;
  double base_sigma = 0.0;
  double image_norm = 0.0;
  double image_sigma = 0.0;
  Ball<N> base_argmax{}, image_argmax{};
  std::size_t balls = 0;
};

// ||u o f^{-1}|| / ||u|| over matched families: the image family carries each domain
// ball to a ball at f(center) with probe-matched radius, so isometries compare
// congruent families and dilations compare rescaled ones.
template <int N>
TransferReport<N> bmo_transfer_experiment(const MapDescriptor<N>& f, const ScalarField<N>& u,
                                          const BallFamily<N>& family, std::uint64_t samples_per_ball,
                                          std::uint64_t seed, const MetricContext<N>& ctx = {},
                                          int refine_rounds = 1) {
  if (!f.inverse) throw std::invalid_argument("bmo_transfer_experiment: map must be invertible");
  const std::vector<Ball<N>> base_balls = family.materialize();
  std::vector<Ball<N>> image_balls;
  image_balls.reserve(base_balls.size());
  for (const auto& b : base_balls)
    image_balls.push_back(Ball<N>{f(b.center), probe_image_radius<N>(f, b.center, b.radius, ctx), b.metric});

  const BmoScan<N> base = bmo_scan<N>(u, base_balls, samples_per_ball, mix_bits(seed, 0x7f100001ULL), ctx, refine_rounds);
  const ScalarField<N> fu = pushforward<N>(u, f);
  const BmoScan<N> image = bmo_scan<N>(fu, image_balls, samples_per_ball, mix_bits(seed, 0x7f100002ULL), ctx, refine_rounds);

  TransferReport<N> rep;
  rep.base_norm = base.value;
  rep.base_sigma = base.sigma_at_argmax;
  rep.image_norm = image.value;
  rep.image_sigma = image.sigma_at_argmax;
  rep.base_argmax = base.argmax;
  rep.image_argmax = image.argmax;
  rep.balls = base_balls.size();
  if (!(base.value > 0.0)) throw std::runtime_error("bmo_transfer_experiment: zero base norm (constant field?)");
  rep.ratio = image.value / base.value;
  return rep;
}

}  // namespace heis
