#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "hom.hpp"
#include "maps.hpp"
#include "metrics_basic.hpp"
#include "stats.hpp"

namespace heis {

// Pansu differential estimator. The rescaled increment at scale s in direction v is
//   D_s(v) = delta_{1/s}( f(p)^{-1} f((delta_s v) p) )          (left increments)
//   D_s(v) = delta_{1/s}( f(p)^{-1} f(p (delta_s v)) )          (right increments)
// and f is differentiable at p with differential L iff d(D_s(v), L(v)) -> 0. A homogeneous
// hom (A, mu) is fitted by least squares on the finest scales; per-scale sup residuals are
// reported, with divergence flagged from monotone growth.
//
// The two conventions disagree away from the center axis: left increments pick up the
// conjugation defect (0, -4 Im<z_p, conj(z_h)>), whose rescaled gauge size grows like
// s^{-1/2}, so under the left convention even group-affine maps reproduce exactly only
// where z_p = 0, while under the right convention they reproduce at every base point.
// Left is the default; Right is available for comparison. Neither is "fixed up": the
// estimator reports what its convention sees.

enum class IncrementSide { Left, Right };

template <int N>
struct PansuOptions {
  std::vector<double> scales;        // decreasing; default 2^{-1} .. 2^{-8}
  std::vector<HPoint<N>> directions; // unit Koranyi norm; default spans horizontal + center
  IncrementSide side = IncrementSide::Left;
  int fit_scales = 3;                // finest scales used for the least-squares fit
  double residual_floor = 1e-7;      // below this a scale counts as exactly reproduced; a
                                     // rounding-level vertical mismatch eps has Koranyi
                                     // size sqrt(eps) ~ 1e-8, so the floor sits above that
  double fp_noise_coeff = 2.0;       // scales the per-scale fp noise floor sqrt(eps*m)/s
                                     // (a t-side rounding error eps*m rescaled by 1/s^2
                                     // has Koranyi size sqrt(eps*m)/s)
  double divergence_floor = 1e-3;    // growth is only flagged above this level
  double growth_factor = 1.25;       // per-halving growth declaring divergence (a pure
                                     // vertical defect grows by sqrt(2) per halving)
};

template <int N>
std::vector<HPoint<N>> default_pansu_directions() {
  std::vector<HPoint<N>> dirs;
  const double isq2 = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < N; ++j) {
    for (double sgn : {1.0, -1.0}) {
      HPoint<N> e{};
      e.z[j] = cplx(sgn, 0.0);
      dirs.push_back(e);
      e.z[j] = cplx(0.0, sgn);
      dirs.push_back(e);
      e.z[j] = cplx(sgn * isq2, sgn * isq2);
      dirs.push_back(e);
    }
  }
  HPoint<N> up{}, dn{};
  up.t = 1.0;
  dn.t = -1.0;
  dirs.push_back(up);
  dirs.push_back(dn);
  return dirs;
}

template <int N>
std::vector<double> default_pansu_scales() {
  std::vector<double> s;
  for (int k = 1; k <= 8; ++k) s.push_back(std::ldexp(1.0, -k));
  return s;
}

template <int N>
struct PansuEstimate {
  HomogeneousHom<N> differential{};
  std::vector<double> scales;
  std::vector<double> residuals;     // sup over directions of d(D_s(v), L_fit(v))
  std::vector<double> noise_floors;  // per-scale fp noise level; residuals below it carry
                                     // no information about the map
  bool divergent = false;
  bool exact = false;                // every residual at or below its floor
  double exponent = std::numeric_limits<double>::quiet_NaN();  // log-log slope of residual(s)
  double mu_fit_weight = 0.0;     // mass of vertical directions used for mu
};

namespace detail_pansu {

template <int N, class F>
HPoint<N> rescaled_increment(const F& f, const HPoint<N>& p, const HPoint<N>& fp_inv, const HPoint<N>& v,
                             double s, IncrementSide side) {
  const HPoint<N> h = dilate<N>(s, v);
  const HPoint<N> arg = side == IncrementSide::Left ? multiply(h, p) : multiply(p, h);
  return dilate<N>(1.0 / s, multiply(fp_inv, f(arg)));
}

// Solves A S = M for A (written back into M); S is the Gram matrix of the directions,
// symmetric positive definite for any spanning direction set. d <= 8: explicit inverse.
template <int N>
void solve_normal(const std::array<double, (2 * N) * (2 * N)>& S, std::array<double, (2 * N) * (2 * N)>& M) {
  constexpr int d = 2 * N;
  auto at = [](auto& m, int r, int c) -> auto& { return m[static_cast<std::size_t>(r) * d + c]; };
  std::array<double, d * d> inv{};
  std::array<double, d * d> a = S;
  for (int i = 0; i < d; ++i) inv[static_cast<std::size_t>(i) * d + i] = 1.0;
  for (int col = 0; col < d; ++col) {
    int piv = col;
    for (int r = col + 1; r < d; ++r)
      if (std::abs(at(a, r, col)) > std::abs(at(a, piv, col))) piv = r;
    if (std::abs(at(a, piv, col)) < 1e-300) continue;
    if (piv != col)
      for (int c = 0; c < d; ++c) {
        std::swap(at(a, piv, c), at(a, col, c));
        std::swap(at(inv, piv, c), at(inv, col, c));
      }
    const double sc = 1.0 / at(a, col, col);
    for (int c = 0; c < d; ++c) {
      at(a, col, c) *= sc;
      at(inv, col, c) *= sc;
    }
    for (int r = 0; r < d; ++r) {
      if (r == col) continue;
      const double f = at(a, r, col);
      if (f == 0.0) continue;
      for (int c = 0; c < d; ++c) {
        at(a, r, c) -= f * at(a, col, c);
        at(inv, r, c) -= f * at(inv, col, c);
      }
    }
  }
  std::array<double, d * d> result{};
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      double v = 0.0;
      for (int k = 0; k < d; ++k) v += at(M, r, k) * at(inv, k, c);
      result[static_cast<std::size_t>(r) * d + c] = v;
    }
  M = result;
}

}  // namespace detail_pansu

template <int N, class F>
PansuEstimate<N> pansu_differential_estimate(const F& f, const HPoint<N>& p, PansuOptions<N> opt = {}) {
  if (opt.scales.empty()) opt.scales = default_pansu_scales<N>();
  if (opt.directions.empty()) opt.directions = default_pansu_directions<N>();
  constexpr int d = 2 * N;

  const HPoint<N> fp_inv = inverse<N>(f(p));
  const std::size_t ns = opt.scales.size(), nd = opt.directions.size();
  std::vector<HPoint<N>> incr(ns * nd);
  for (std::size_t si = 0; si < ns; ++si)
    for (std::size_t di = 0; di < nd; ++di)
      incr[si * nd + di] =
          detail_pansu::rescaled_increment<N>(f, p, fp_inv, opt.directions[di], opt.scales[si], opt.side);

  // least squares on the finest scales: A from horizontal rows, mu from central directions
  PansuEstimate<N> out;
  const int kfit = std::min<int>(opt.fit_scales, static_cast<int>(ns));
  std::array<double, d * d> S{}, M{};
  double mu_num = 0.0, mu_den = 0.0;
  for (std::size_t si = ns - static_cast<std::size_t>(kfit); si < ns; ++si)
    for (std::size_t di = 0; di < nd; ++di) {
      const HPoint<N>& v = opt.directions[di];
      const HPoint<N>& dv = incr[si * nd + di];
      if (!dv.finite()) continue;
      std::array<double, d> xv{}, yv{};
      for (int j = 0; j < N; ++j) {
        xv[j] = v.z[j].real();
        xv[N + j] = v.z[j].imag();
        yv[j] = dv.z[j].real();
        yv[N + j] = dv.z[j].imag();
      }
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
          S[static_cast<std::size_t>(r) * d + c] += xv[r] * xv[c];
          M[static_cast<std::size_t>(r) * d + c] += yv[r] * xv[c];
        }
      if (std::abs(v.t) > 1e-12) {
        mu_num += dv.t * v.t;
        mu_den += v.t * v.t;
      }
    }
  detail_pansu::solve_normal<N>(S, M);
  out.differential.A = M;
  if (mu_den > 0.0) {
    out.differential.mu = mu_num / mu_den;
    out.mu_fit_weight = mu_den;
  } else {
    // no central directions supplied: recover mu from the symplectic form of A
    HPoint<N> e1{}, ie1{};
    e1.z[0] = cplx(1, 0);
    ie1.z[0] = cplx(0, 1);
    const HPoint<N> a1 = hom_apply<N>(out.differential, e1), a2 = hom_apply<N>(out.differential, ie1);
    out.differential.mu = -symplectic_form<N>(a1.z, a2.z);
  }

  out.scales = opt.scales;
  out.residuals.assign(ns, 0.0);
  for (std::size_t si = 0; si < ns; ++si) {
    double worst = 0.0;
    for (std::size_t di = 0; di < nd; ++di) {
      const HPoint<N>& dv = incr[si * nd + di];
      const double r = dv.finite()
                           ? koranyi_distance<N>(dv, hom_apply<N>(out.differential, opt.directions[di]))
                           : std::numeric_limits<double>::infinity();
      worst = std::max(worst, r);
    }
    out.residuals[si] = worst;
  }

  // fp noise floor per scale: rounding errors of relative size eps on the t components
  // of p and f(p) rescale by 1/s^2 and carry Koranyi size sqrt(eps*m)/s. The fitted hom
  // inherits the noise of the finest fit scale, so no rung's floor sits below that level:
  // residuals under it are rounding artifacts of the fit, not information about the map.
  const HPoint<N> fp = f(p);
  double mag = 1.0;
  mag = std::max(mag, std::abs(p.t));
  mag = std::max(mag, std::abs(fp.t));
  for (int j = 0; j < N; ++j) {
    mag = std::max(mag, std::norm(p.z[j]));
    mag = std::max(mag, std::norm(fp.z[j]));
  }
  constexpr double kEps = 2.220446049250313e-16;
  double fit_floor = 0.0;
  for (std::size_t si = ns - static_cast<std::size_t>(kfit); si < ns; ++si)
    fit_floor = std::max(fit_floor, opt.fp_noise_coeff * std::sqrt(kEps * mag) / opt.scales[si]);
  out.noise_floors.assign(ns, 0.0);
  for (std::size_t si = 0; si < ns; ++si)
    out.noise_floors[si] =
        std::max({opt.residual_floor, opt.fp_noise_coeff * std::sqrt(kEps * mag) / opt.scales[si],
                  fit_floor});

  out.exact = true;
  for (std::size_t si = 0; si < ns; ++si)
    if (out.residuals[si] > out.noise_floors[si]) out.exact = false;
  if (out.exact) out.exponent = std::numeric_limits<double>::infinity();  // below the noise
                                                                          // floor at every scale

  // divergence: residuals grow monotonically by >= growth_factor over the last three scales
  // and end above the divergence floor
  if (ns >= 3) {
    const double r0 = out.residuals[ns - 3], r1 = out.residuals[ns - 2], r2 = out.residuals[ns - 1];
    out.divergent = r2 > opt.divergence_floor && r1 * opt.growth_factor <= r2 * (1.0 + 1e-12) &&
                    r0 * opt.growth_factor <= r1 * (1.0 + 1e-12);
  }

  std::vector<double> lx, ly;
  for (std::size_t si = 0; si < ns; ++si)
    if (out.residuals[si] > out.noise_floors[si] && std::isfinite(out.residuals[si])) {
      lx.push_back(std::log(opt.scales[si]));
      ly.push_back(std::log(out.residuals[si]));
    }
  if (lx.size() >= 2) out.exponent = linear_fit(lx, ly).slope;
  return out;
}

template <int N>
PansuEstimate<N> pansu_differential_estimate(const MapDescriptor<N>& f, const HPoint<N>& p,
                                             const PansuOptions<N>& opt = {}) {
  return pansu_differential_estimate<N>(f.forward, p, opt);
}

}  // namespace heis
