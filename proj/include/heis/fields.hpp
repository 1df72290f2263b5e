#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "maps.hpp"
#include "metrics_basic.hpp"

namespace heis {

template <int N>
struct ScalarField {
  std::string id;
  std::function<double(const HPoint<N>&)> eval;
  bool bounded = false;
  double sup_abs = std::numeric_limits<double>::infinity();

  double operator()(const HPoint<N>& p) const { return eval(p); }
};

// Coordinate axis names: x1..xn, y1..yn, t (the to_coords packing).
template <int N>
int axis_index(const std::string& axis) {
  if (axis == "t") return 2 * N;
  if (axis.size() >= 2 && (axis[0] == 'x' || axis[0] == 'y')) {
    const int j = std::stoi(axis.substr(1)) - 1;
    if (j >= 0 && j < N) return axis[0] == 'x' ? j : N + j;
  }
  throw std::invalid_argument("unknown axis '" + axis + "' for n=" + std::to_string(N));
}

template <int N>
ScalarField<N> field_constant(double c) {
  ScalarField<N> f;
  f.id = "constant";
  f.eval = [c](const HPoint<N>&) { return c; };
  f.bounded = true;
  f.sup_abs = std::abs(c);
  return f;
}

template <int N>
ScalarField<N> field_bounded_sinusoid(double freq = 1.0, int axis = 0) {
  ScalarField<N> f;
  f.id = "bounded-sinusoid";
  f.eval = [freq, axis](const HPoint<N>& p) { return std::sin(freq * to_coords<N>(p)[static_cast<std::size_t>(axis)]); };
  f.bounded = true;
  f.sup_abs = 1.0;
  return f;
}

template <int N>
ScalarField<N> field_indicator_halfspace(int axis = 2 * N, double threshold = 0.0) {
  ScalarField<N> f;
  f.id = "indicator-halfspace";
  f.eval = [axis, threshold](const HPoint<N>& p) {
    return to_coords<N>(p)[static_cast<std::size_t>(axis)] > threshold ? 1.0 : 0.0;
  };
  f.bounded = true;
  f.sup_abs = 1.0;
  return f;
}

// log d(x, center): the model BMO function; singular on a null set only.
template <int N>
ScalarField<N> field_log_koranyi(const HPoint<N>& center = {}) {
  ScalarField<N> f;
  f.id = "log-koranyi";
  f.eval = [center](const HPoint<N>& p) { return std::log(koranyi_distance<N>(p, center)); };
  return f;
}

// d(x, center) itself grows linearly, hence is not BMO on large balls.
template <int N>
ScalarField<N> field_koranyi_distance(const HPoint<N>& center = {}) {
  ScalarField<N> f;
  f.id = "koranyi-distance";
  f.eval = [center](const HPoint<N>& p) { return koranyi_distance<N>(p, center); };
  return f;
}

template <int N>
ScalarField<N> field_affine(const std::vector<std::pair<ScalarField<N>, double>>& terms, double offset = 0.0) {
  ScalarField<N> f;
  f.id = "affine(";
  bool bounded = true;
  double sup = std::abs(offset);
  for (const auto& [u, w] : terms) {
    f.id += u.id + ",";
    bounded = bounded && u.bounded;
    sup += std::abs(w) * u.sup_abs;
  }
  f.id += ")";
  auto ts = terms;
  f.eval = [ts, offset](const HPoint<N>& p) {
    double v = offset;
    for (const auto& [u, w] : ts) v += w * u.eval(p);
    return v;
  };
  f.bounded = bounded;
  f.sup_abs = bounded ? sup : std::numeric_limits<double>::infinity();
  return f;
}

// (f_* u)(x) = u(f^{-1}(x)); requires an invertible map.
template <int N>
ScalarField<N> pushforward(const ScalarField<N>& u, const MapDescriptor<N>& f) {
  if (!f.inverse) throw std::invalid_argument("pushforward: map '" + f.id + "' has no inverse");
  ScalarField<N> g;
  g.id = "push(" + u.id + "," + f.id + ")";
  auto ue = u.eval;
  auto fi = f.inverse;
  g.eval = [ue, fi](const HPoint<N>& p) { return ue(fi(p)); };
  g.bounded = u.bounded;
  g.sup_abs = u.sup_abs;
  return g;
}

inline std::vector<CatalogEntry> field_catalog() {
  return {
      {"constant", "c", "BMO norm 0"},
      {"bounded-sinusoid", "freq, axis", "bounded, BMO"},
      {"indicator-halfspace", "axis, threshold", "bounded, BMO"},
      {"log-koranyi", "center", "unbounded BMO model"},
      {"koranyi-distance", "center", "not BMO (linear growth)"},
      {"affine", "terms, offset", "affine combination of catalog fields"},
  };
}

}  // namespace heis
