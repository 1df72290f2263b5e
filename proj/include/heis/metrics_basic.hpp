#pragma once

#include <cmath>
#include <string>

#include "core.hpp"

namespace heis {

// Koranyi gauge |(z,t)| = (|z|^4 + t^2)^{1/4}; d(p,q) = |q^{-1} p| is a genuine
// left-invariant metric, 1-homogeneous under dilations.
template <int N>
double koranyi_norm(const HPoint<N>& p) {
  const double h2 = horizontal_norm_sq<N>(p);
  return std::pow(h2 * h2 + p.t * p.t, 0.25);
}

template <int N>
double koranyi_distance(const HPoint<N>& p, const HPoint<N>& q) {
  return koranyi_norm<N>(left_difference<N>(q, p));
}

enum class Metric { Koranyi, CC };

inline std::string metric_name(Metric m) { return m == Metric::Koranyi ? "koranyi" : "cc"; }

template <int N>
struct Ball {
  HPoint<N> center{};
  double radius = 1.0;
  Metric metric = Metric::Koranyi;
};

}  // namespace heis
