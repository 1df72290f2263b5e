#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "core.hpp"
#include "rng.hpp"

namespace heis {

// Homogeneous homomorphism (z, t) -> (A z, mu t); A is a real 2n x 2n matrix acting on the
// packed horizontal coordinates (x_1..x_n, y_1..y_n), mu the vertical multiplier. It is a
// group homomorphism iff Im<Az, Az'> = mu Im<z, z'> for all z, z' (symplectic compatibility);
// homogeneity under dilations is automatic.
template <int N>
struct HomogeneousHom {
  static constexpr int dim = 2 * N;
  std::array<double, dim * dim> A{};
  double mu = 1.0;

  double& a(int r, int c) { return A[static_cast<std::size_t>(r) * dim + c]; }
  double a(int r, int c) const { return A[static_cast<std::size_t>(r) * dim + c]; }

  static HomogeneousHom identity() {
    HomogeneousHom L;
    for (int i = 0; i < dim; ++i) L.a(i, i) = 1.0;
    return L;
  }
};

template <int N>
HPoint<N> hom_apply(const HomogeneousHom<N>& L, const HPoint<N>& p) {
  constexpr int d = 2 * N;
  std::array<double, d> v{};
  for (int j = 0; j < N; ++j) {
    v[j] = p.z[j].real();
    v[N + j] = p.z[j].imag();
  }
  HPoint<N> out;
  for (int j = 0; j < N; ++j) {
    double re = 0.0, im = 0.0;
    for (int c = 0; c < d; ++c) {
      re += L.a(j, c) * v[c];
      im += L.a(N + j, c) * v[c];
    }
    out.z[j] = cplx(re, im);
  }
  out.t = L.mu * p.t;
  return out;
}

// Inverse hom (A^{-1}, 1/mu); throws if A is singular or mu == 0.
template <int N>
HomogeneousHom<N> hom_inverse(const HomogeneousHom<N>& L) {
  constexpr int d = 2 * N;
  if (L.mu == 0.0) throw std::invalid_argument("hom_inverse: mu must be nonzero");
  std::array<double, d * d> m = L.A;
  HomogeneousHom<N> inv = HomogeneousHom<N>::identity();
  inv.mu = 1.0 / L.mu;
  auto at = [](std::array<double, d * d>& mat, int r, int c) -> double& {
    return mat[static_cast<std::size_t>(r) * d + c];
  };
  // Gauss-Jordan with partial pivoting; d <= 8 at desk scale.
  for (int col = 0; col < d; ++col) {
    int piv = col;
    for (int r = col + 1; r < d; ++r)
      if (std::abs(at(m, r, col)) > std::abs(at(m, piv, col))) piv = r;
    if (std::abs(at(m, piv, col)) < 1e-14) throw std::invalid_argument("hom_inverse: singular A");
    if (piv != col)
      for (int c = 0; c < d; ++c) {
        std::swap(at(m, piv, c), at(m, col, c));
        std::swap(inv.a(piv, c), inv.a(col, c));
      }
    const double s = 1.0 / at(m, col, col);
    for (int c = 0; c < d; ++c) {
      at(m, col, c) *= s;
      inv.a(col, c) *= s;
    }
    for (int r = 0; r < d; ++r) {
      if (r == col) continue;
      const double f = at(m, r, col);
      if (f == 0.0) continue;
      for (int c = 0; c < d; ++c) {
        at(m, r, c) -= f * at(m, col, c);
        inv.a(r, c) -= f * inv.a(col, c);
      }
    }
  }
  return inv;
}

// det(A) by LU with partial pivoting; |det(A) * mu| is the (constant) Jacobian of the
// hom as a map of R^{2n+1}.
template <int N>
double hom_det(const HomogeneousHom<N>& L) {
  constexpr int d = 2 * N;
  std::array<double, d * d> m = L.A;
  auto at = [](std::array<double, d * d>& mat, int r, int c) -> double& {
    return mat[static_cast<std::size_t>(r) * d + c];
  };
  double det = 1.0;
  for (int col = 0; col < d; ++col) {
    int piv = col;
    for (int r = col + 1; r < d; ++r)
      if (std::abs(at(m, r, col)) > std::abs(at(m, piv, col))) piv = r;
    if (at(m, piv, col) == 0.0) return 0.0;
    if (piv != col) {
      for (int c = 0; c < d; ++c) std::swap(at(m, piv, c), at(m, col, c));
      det = -det;
    }
    det *= at(m, col, col);
    for (int r = col + 1; r < d; ++r) {
      const double f = at(m, r, col) / at(m, col, col);
      if (f == 0.0) continue;
      for (int c = col; c < d; ++c) at(m, r, c) -= f * at(m, col, c);
    }
  }
  return det;
}

template <int N>
double hom_jacobian(const HomogeneousHom<N>& L) {
  return std::abs(hom_det<N>(L) * L.mu);
}

struct HomValidation {
  bool ok = false;
  double worst_residual = 0.0;
};

// Checks L(pq) == L(p)L(q) on random pairs; the residual is measured on the vertical
// component (the horizontal part is linear and exact by construction).
template <int N>
HomValidation validate_homomorphism(const HomogeneousHom<N>& L, int samples, double tol, std::uint64_t seed) {
  Rng rng = derive_rng(seed, 0x686f6d76ULL);
  HomValidation res;
  for (int i = 0; i < samples; ++i) {
    HPoint<N> p, q;
    for (int j = 0; j < N; ++j) {
      p.z[j] = cplx(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
      q.z[j] = cplx(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
    }
    p.t = rng.uniform(-4.0, 4.0);
    q.t = rng.uniform(-4.0, 4.0);
    const HPoint<N> lhs = hom_apply(L, multiply(p, q));
    const HPoint<N> rhs = multiply(hom_apply(L, p), hom_apply(L, q));
    double r = std::abs(lhs.t - rhs.t);
    for (int j = 0; j < N; ++j) r = std::max(r, std::abs(lhs.z[j] - rhs.z[j]));
    res.worst_residual = std::max(res.worst_residual, r);
  }
  res.ok = res.worst_residual <= tol;
  return res;
}

// Random valid hom on H^1: A = s * R(phi1) diag(sig, 1/sig) R(phi2) (optionally composed with
// the orientation flip diag(1,-1)), mu = +-s^2. cond(A) = sig^2.
inline HomogeneousHom<1> random_h1_hom(Rng& rng, double max_cond, bool allow_negative_mu = true) {
  const double sig = std::sqrt(rng.uniform(1.0, max_cond));
  const double s = std::exp(rng.uniform(-0.5, 0.5));
  const double p1 = rng.uniform(0.0, 6.283185307179586);
  const double p2 = rng.uniform(0.0, 6.283185307179586);
  const bool flip = allow_negative_mu && rng.uniform01() < 0.5;
  auto rot = [](double a, int r, int c) {
    const double m[2][2] = {{std::cos(a), -std::sin(a)}, {std::sin(a), std::cos(a)}};
    return m[r][c];
  };
  HomogeneousHom<1> L;
  const double d[2] = {sig, 1.0 / sig};
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      double v = 0.0;
      for (int k = 0; k < 2; ++k) v += rot(p1, r, k) * d[k] * rot(p2, k, c);
      L.a(r, c) = s * v;
    }
  L.mu = s * s;
  if (flip) {
    // right-multiply by diag(1,-1): negate the second column; flips the form's sign.
    L.a(0, 1) = -L.a(0, 1);
    L.a(1, 1) = -L.a(1, 1);
    L.mu = -L.mu;
  }
  return L;
}

}  // namespace heis
