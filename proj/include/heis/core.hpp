#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace heis {

using cplx = std::complex<double>;

// Heisenberg group H^n = C^n x R with
//   (z,t)(z',t') = (z + z', t + t' + 2 Im <z, z'>),  <z, z'> = sum_j z_j conj(z'_j).
// Homogeneous dimension Q = 2n + 2; Haar measure is Lebesgue measure in (z, t).
template <int N>
struct GroupParams {
  static_assert(N >= 1, "H^n needs n >= 1");
  static constexpr int n = N;
  static constexpr int homogeneous_dimension = 2 * N + 2;
  static constexpr int coords = 2 * N + 1;
};

template <int N>
struct HPoint {
  std::array<cplx, N> z{};
  double t = 0.0;

  static constexpr HPoint identity() { return {}; }

  bool finite() const {
    for (const auto& zj : z)
      if (!std::isfinite(zj.real()) || !std::isfinite(zj.imag())) return false;
    return std::isfinite(t);
  }

  friend bool operator==(const HPoint& a, const HPoint& b) = default;
};

inline HPoint<1> h1(double x, double y, double t) { return HPoint<1>{{cplx(x, y)}, t}; }

// Im <z, w> = sum_j (Im z_j Re w_j - Re z_j Im w_j); the symplectic form of the group law.
template <int N>
double symplectic_form(const std::array<cplx, N>& z, const std::array<cplx, N>& w) {
  double s = 0.0;
  for (int j = 0; j < N; ++j) s += z[j].imag() * w[j].real() - z[j].real() * w[j].imag();
  return s;
}

template <int N>
HPoint<N> multiply(const HPoint<N>& p, const HPoint<N>& q) {
  HPoint<N> r;
  for (int j = 0; j < N; ++j) r.z[j] = p.z[j] + q.z[j];
  r.t = p.t + q.t + 2.0 * symplectic_form<N>(p.z, q.z);
  return r;
}

template <int N>
HPoint<N> inverse(const HPoint<N>& p) {
  HPoint<N> r;
  for (int j = 0; j < N; ++j) r.z[j] = -p.z[j];
  r.t = -p.t;
  return r;
}

// delta_s(z, t) = (s z, s^2 t); group automorphism for every s > 0.
template <int N>
HPoint<N> dilate(double s, const HPoint<N>& p) {
  HPoint<N> r;
  for (int j = 0; j < N; ++j) r.z[j] = s * p.z[j];
  r.t = s * s * p.t;
  return r;
}

template <int N>
HPoint<N> left_translate(const HPoint<N>& l, const HPoint<N>& p) {
  return multiply(l, p);
}

// q^{-1} p without forming the inverse separately.
template <int N>
HPoint<N> left_difference(const HPoint<N>& q, const HPoint<N>& p) {
  HPoint<N> r;
  for (int j = 0; j < N; ++j) r.z[j] = p.z[j] - q.z[j];
  r.t = p.t - q.t - 2.0 * symplectic_form<N>(q.z, r.z);
  return r;
}

template <int N>
double horizontal_norm_sq(const HPoint<N>& p) {
  double s = 0.0;
  for (int j = 0; j < N; ++j) s += std::norm(p.z[j]);
  return s;
}

// Packed real coordinates (x_1..x_n, y_1..y_n, t); the order used for boxes, lattices
// and the 2n x 2n matrix action of homogeneous homomorphisms.
template <int N>
std::array<double, 2 * N + 1> to_coords(const HPoint<N>& p) {
  std::array<double, 2 * N + 1> c{};
  for (int j = 0; j < N; ++j) {
    c[j] = p.z[j].real();
    c[N + j] = p.z[j].imag();
  }
  c[2 * N] = p.t;
  return c;
}

template <int N>
HPoint<N> from_coords(const std::array<double, 2 * N + 1>& c) {
  HPoint<N> p;
  for (int j = 0; j < N; ++j) p.z[j] = cplx(c[j], c[N + j]);
  p.t = c[2 * N];
  return p;
}

}  // namespace heis
