#include <catch2/catch_amalgamated.hpp>

#include <heis/metrics.hpp>

using namespace heis;

namespace {

// independent gauge computation from flat coordinates
template <int N>
double oracle_gauge(const HPoint<N>& p) {
  double z2 = 0.0;
  for (int j = 0; j < N; ++j) z2 += std::norm(p.z[j]);
  return std::pow(z2 * z2 + p.t * p.t, 0.25);
}

template <int N>
HPoint<N> rand_point(Rng& rng) {
  HPoint<N> p;
  for (int j = 0; j < N; ++j) p.z[j] = cplx(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
  p.t = rng.uniform(-4.0, 4.0);
  return p;
}

}  // namespace

TEST_CASE("frozen gauge values", "[metrics]") {
  HPoint<1> p{};
  p.z[0] = cplx(1.0, 0.0);
  CHECK(koranyi_norm<1>(p) == 1.0);
  p.z[0] = cplx(1.0, 1.0);
  p.t = 0.0;
  CHECK(koranyi_norm<1>(p) == Catch::Approx(std::sqrt(2.0)).epsilon(1e-14));
  p.z[0] = 0.0;
  p.t = 1.0;
  CHECK(koranyi_norm<1>(p) == 1.0);
  p.t = 4.0;
  CHECK(koranyi_norm<1>(p) == 2.0);  // |t|^(1/2)
}

TEST_CASE("gauge matches oracle; distance via group difference", "[metrics]") {
  Rng rng = derive_rng(201, 1);
  for (int i = 0; i < 3000; ++i) {
    const auto p = rand_point<2>(rng);
    const auto q = rand_point<2>(rng);
    CHECK(koranyi_norm<2>(p) == Catch::Approx(oracle_gauge<2>(p)).margin(1e-14));
    CHECK(koranyi_distance<2>(p, q) ==
          Catch::Approx(oracle_gauge<2>(multiply<2>(inverse<2>(p), q))).margin(1e-14));
  }
}

TEST_CASE("metric axioms hold numerically", "[metrics]") {
  Rng rng = derive_rng(202, 1);
  for (int i = 0; i < 3000; ++i) {
    const auto p = rand_point<1>(rng);
    const auto q = rand_point<1>(rng);
    const auto r = rand_point<1>(rng);
    const double dpq = koranyi_distance<1>(p, q);
    CHECK(dpq >= 0.0);
    CHECK(koranyi_distance<1>(p, p) == 0.0);
    CHECK(dpq == Catch::Approx(koranyi_distance<1>(q, p)).margin(1e-12));
    CHECK(dpq <= koranyi_distance<1>(p, r) + koranyi_distance<1>(r, q) + 1e-12);
  }
}

TEST_CASE("left-invariance and homogeneity", "[metrics]") {
  Rng rng = derive_rng(203, 1);
  double worst_li = 0.0, worst_hom = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto g = rand_point<1>(rng);
    const auto p = rand_point<1>(rng);
    const auto q = rand_point<1>(rng);
    const double d = koranyi_distance<1>(p, q);
    worst_li =
        std::max(worst_li, std::abs(koranyi_distance<1>(multiply<1>(g, p), multiply<1>(g, q)) - d) /
                               std::max(1.0, d));
    const double s = std::exp(rng.uniform(-2.0, 2.0));
    worst_hom = std::max(
        worst_hom, std::abs(koranyi_distance<1>(dilate<1>(s, p), dilate<1>(s, q)) - s * d) /
                       std::max(1.0, s * d));
  }
  CHECK(worst_li <= 1e-12);
  CHECK(worst_hom <= 1e-12);
}

TEST_CASE("rotations and conjugation preserve the gauge exactly", "[metrics]") {
  Rng rng = derive_rng(204, 1);
  for (int i = 0; i < 2000; ++i) {
    const auto p = rand_point<1>(rng);
    const double theta = rng.uniform(0.0, 6.28318);
    HPoint<1> rp = p;
    rp.z[0] *= std::polar(1.0, theta);
    CHECK(koranyi_norm<1>(rp) == Catch::Approx(koranyi_norm<1>(p)).margin(1e-13));
    HPoint<1> cp = p;
    cp.z[0] = std::conj(p.z[0]);
    cp.t = -p.t;
    CHECK(koranyi_norm<1>(cp) == koranyi_norm<1>(p));
  }
}

TEST_CASE("ball interior sampler stays inside and fills the ball", "[metrics]") {
  Ball<1> b;
  b.center.z[0] = cplx(0.5, -0.25);
  b.center.t = 1.0;
  b.radius = 2.0;
  const auto sample = ball_sample_interior<1>(b, 5000, 205);
  double max_seen = 0.0;
  for (const auto& x : sample.points) {
    const double d = koranyi_distance<1>(b.center, x);
    CHECK(d <= 2.0 * (1.0 + 1e-12));
    max_seen = std::max(max_seen, d);
  }
  REQUIRE(sample.points.size() == 5000);
  CHECK(max_seen > 1.9);  // not clustered near the center
}

TEST_CASE("sphere sampler lands exactly on the koranyi sphere", "[metrics]") {
  HPoint<1> c;
  c.z[0] = cplx(-0.3, 0.8);
  c.t = -0.5;
  for (const auto& x : sphere_sample<1>(c, 1.5, 2000, 206)) {
    CHECK(koranyi_distance<1>(c, x) == Catch::Approx(1.5).margin(1e-12));
  }
}

TEST_CASE("metric context dispatches koranyi vs cc", "[metrics]") {
  MetricContext<1> kor;
  kor.metric = Metric::Koranyi;
  MetricContext<1> cc;
  cc.metric = Metric::CC;
  cc.cc = cc_fast_config();
  HPoint<1> up{};
  up.t = 1.0;
  const double dk = kor.distance(HPoint<1>::identity(), up);
  const double dc = cc.distance(HPoint<1>::identity(), up);
  CHECK(dk == 1.0);
  CHECK(dc > dk);  // cc path must sweep area; vertical displacement costs sqrt(pi)
  CHECK(dc == Catch::Approx(std::sqrt(M_PI)).epsilon(0.05));
}
