#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "hom.hpp"

namespace heis {

// Self-map of H^n given by explicit evaluators. Estimators only ever call forward /
// inverse; the flags describe what the catalog knows about the map a priori.
template <int N>
struct MapDescriptor {
  std::string id;
  std::function<HPoint<N>(const HPoint<N>&)> forward;
  std::function<HPoint<N>(const HPoint<N>&)> inverse;  // empty when no closed form is known
  bool group_compatible = false;  // left translation composed with a homogeneous hom
  bool isometry = false;          // Koranyi isometry
  bool expected_qc = true;
  // |det Df| when constant over H^n (every catalog map); NaN when unknown
  double jacobian = std::numeric_limits<double>::quiet_NaN();

  HPoint<N> operator()(const HPoint<N>& p) const { return forward(p); }
};

template <int N>
MapDescriptor<N> map_identity() {
  MapDescriptor<N> m;
  m.id = "identity";
  m.forward = [](const HPoint<N>& p) { return p; };
  m.inverse = m.forward;
  m.group_compatible = true;
  m.isometry = true;
  m.jacobian = 1.0;
  return m;
}

template <int N>
MapDescriptor<N> map_left_translation(const HPoint<N>& l) {
  MapDescriptor<N> m;
  m.id = "left-translation";
  const HPoint<N> linv = inverse<N>(l);
  m.forward = [l](const HPoint<N>& p) { return multiply(l, p); };
  m.inverse = [linv](const HPoint<N>& p) { return multiply(linv, p); };
  m.group_compatible = true;
  m.isometry = true;
  m.jacobian = 1.0;
  return m;
}

// (z, t) -> (e^{i theta_j} z_j, t); a Koranyi isometry and automorphism.
template <int N>
MapDescriptor<N> map_rotation(const std::vector<double>& thetas) {
  if (thetas.empty()) throw std::invalid_argument("map_rotation: need at least one angle");
  std::array<cplx, N> ph, phinv;
  for (int j = 0; j < N; ++j) {
    const double a = thetas[static_cast<std::size_t>(j) < thetas.size() ? static_cast<std::size_t>(j) : 0];
    ph[j] = std::polar(1.0, a);
    phinv[j] = std::polar(1.0, -a);
  }
  MapDescriptor<N> m;
  m.id = "rotation";
  m.forward = [ph](HPoint<N> p) {
    for (int j = 0; j < N; ++j) p.z[j] *= ph[j];
    return p;
  };
  m.inverse = [phinv](HPoint<N> p) {
    for (int j = 0; j < N; ++j) p.z[j] *= phinv[j];
    return p;
  };
  m.group_compatible = true;
  m.isometry = true;
  m.jacobian = 1.0;
  return m;
}

// (z, t) -> (conj z, -t); automorphism with mu = -1, still an isometry.
template <int N>
MapDescriptor<N> map_conjugation() {
  MapDescriptor<N> m;
  m.id = "conjugation";
  m.forward = [](HPoint<N> p) {
    for (int j = 0; j < N; ++j) p.z[j] = std::conj(p.z[j]);
    p.t = -p.t;
    return p;
  };
  m.inverse = m.forward;
  m.group_compatible = true;
  m.isometry = true;
  m.jacobian = 1.0;
  return m;
}

template <int N>
MapDescriptor<N> map_dilation(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("map_dilation: lambda must be positive");
  MapDescriptor<N> m;
  m.id = "dilation";
  m.forward = [lambda](const HPoint<N>& p) { return dilate<N>(lambda, p); };
  m.inverse = [lambda](const HPoint<N>& p) { return dilate<N>(1.0 / lambda, p); };
  m.group_compatible = true;
  m.isometry = lambda == 1.0;
  m.jacobian = std::pow(lambda, 2 * N + 2);
  return m;
}

// L_a: (x_1, y_1) -> (a x_1, y_1 / a) on the first coordinate plane; a valid hom with mu = 1.
template <int N>
MapDescriptor<N> map_anisotropic(double a) {
  if (a == 0.0) throw std::invalid_argument("map_anisotropic: a must be nonzero");
  MapDescriptor<N> m;
  m.id = "anisotropic";
  m.forward = [a](HPoint<N> p) {
    p.z[0] = cplx(a * p.z[0].real(), p.z[0].imag() / a);
    return p;
  };
  m.inverse = [a](HPoint<N> p) {
    p.z[0] = cplx(p.z[0].real() / a, a * p.z[0].imag());
    return p;
  };
  m.group_compatible = true;
  m.isometry = std::abs(a) == 1.0;
  m.jacobian = 1.0;
  return m;
}

template <int N>
HomogeneousHom<N> anisotropic_hom(double a) {
  HomogeneousHom<N> L = HomogeneousHom<N>::identity();
  L.a(0, 0) = a;
  L.a(N, N) = 1.0 / a;
  return L;
}

// (z, t) -> (z, c t): fails the symplectic compatibility for c != 1; the canonical
// non-differentiable, non-QC catalog entry.
template <int N>
MapDescriptor<N> map_vertical_stretch(double c) {
  if (c == 0.0) throw std::invalid_argument("map_vertical_stretch: c must be nonzero");
  MapDescriptor<N> m;
  m.id = "vertical-stretch";
  m.forward = [c](HPoint<N> p) {
    p.t *= c;
    return p;
  };
  m.inverse = [c](HPoint<N> p) {
    p.t /= c;
    return p;
  };
  m.group_compatible = c == 1.0;
  m.isometry = c == 1.0;
  m.expected_qc = c == 1.0;
  m.jacobian = std::abs(c);
  return m;
}

// Lift of the area-preserving planar shear (x, y) -> (x + k y^2, y): a smooth contact map
// with Pansu differential [[1, 2 k y_0], [0, 1]], mu = 1 at (z_0, t_0); not a group morphism.
template <int N>
MapDescriptor<N> map_planar_shear(double kappa) {
  MapDescriptor<N> m;
  m.id = "planar-shear";
  m.forward = [kappa](HPoint<N> p) {
    const double y = p.z[0].imag();
    p.z[0] += cplx(kappa * y * y, 0.0);
    p.t += (2.0 / 3.0) * kappa * y * y * y;
    return p;
  };
  m.inverse = [kappa](HPoint<N> p) {
    const double y = p.z[0].imag();
    p.z[0] -= cplx(kappa * y * y, 0.0);
    p.t -= (2.0 / 3.0) * kappa * y * y * y;
    return p;
  };
  m.group_compatible = kappa == 0.0;
  m.isometry = kappa == 0.0;
  m.jacobian = 1.0;
  return m;
}

template <int N>
MapDescriptor<N> map_from_hom(const HomogeneousHom<N>& L) {
  MapDescriptor<N> m;
  m.id = "hom";
  const HomogeneousHom<N> Linv = hom_inverse<N>(L);
  m.forward = [L](const HPoint<N>& p) { return hom_apply<N>(L, p); };
  m.inverse = [Linv](const HPoint<N>& p) { return hom_apply<N>(Linv, p); };
  m.group_compatible = true;
  m.jacobian = hom_jacobian<N>(L);
  return m;
}

template <int N>
MapDescriptor<N> map_compose(const MapDescriptor<N>& f, const MapDescriptor<N>& g) {
  MapDescriptor<N> m;
  m.id = f.id + "*" + g.id;
  auto ff = f.forward, gf = g.forward;
  m.forward = [ff, gf](const HPoint<N>& p) { return ff(gf(p)); };
  if (f.inverse && g.inverse) {
    auto fi = f.inverse, gi = g.inverse;
    m.inverse = [fi, gi](const HPoint<N>& p) { return gi(fi(p)); };
  }
  m.group_compatible = f.group_compatible && g.group_compatible;
  m.isometry = f.isometry && g.isometry;
  m.expected_qc = f.expected_qc && g.expected_qc;
  m.jacobian = f.jacobian * g.jacobian;
  return m;
}

struct CatalogEntry {
  std::string id;
  std::string params;
  std::string note;
};

inline std::vector<CatalogEntry> map_catalog() {
  return {
      {"identity", "", "isometry; hom (I, 1)"},
      {"left-translation", "l=[x1..xn,y1..yn,t]", "isometry; differential = identity"},
      {"rotation", "theta or thetas=[..]", "isometry; hom (unitary, 1)"},
      {"conjugation", "", "isometry; hom (conj, -1)"},
      {"dilation", "lambda>0", "hom (lambda I, lambda^2)"},
      {"anisotropic", "a!=0", "hom diag(a, 1/a) on (x1, y1), mu=1"},
      {"vertical-stretch", "c!=0", "(z, ct); not a hom, not QC for c!=1"},
      {"planar-shear", "kappa", "contact lift of (x,y)->(x+k y^2, y); differentiable, not a morphism"},
      {"hom", "a=[2n x 2n row-major], mu (optional for n=1)", "general homogeneous hom; validated"},
  };
}

}  // namespace heis
