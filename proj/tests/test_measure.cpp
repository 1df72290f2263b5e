#include <catch2/catch_amalgamated.hpp>

#include <heis/measure.hpp>

using namespace heis;

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

// Unit-ball volume by slicing: t ranges over +-sqrt(1 - |z|^4), then radial in z.
// Substituting |z|^2 = sin(theta) (n=1) and |z|^4 = 1 - cos^2(theta) (n=2) makes the
// integrands smooth, so Simpson converges to machine precision.
double unit_ball_volume_h1() {
  return simpson([](double th) { return 2.0 * M_PI * std::cos(th) * std::cos(th); }, 0.0,
                 M_PI / 2.0, 2000);
}

double unit_ball_volume_h2() {
  // 4 pi^2 int rho^3 sqrt(1-rho^4) drho = pi^2 int_0^1 sqrt(1-u) du
  return M_PI * M_PI * simpson([](double u) { return std::sqrt(1.0 - u); }, 0.0, 1.0, 200000);
}

}  // namespace

TEST_CASE("unit ball volume matches the slicing oracle", "[measure]") {
  const double v1 = unit_ball_volume_h1();
  CHECK(v1 == Catch::Approx(M_PI * M_PI / 2.0).margin(1e-10));  // oracle self-check
  const auto est = ball_volume_estimate<1>(Ball<1>{}, 300000, 0x3ea50001ULL);
  CHECK(est.samples == 300000);
  CHECK(est.sigma > 0.0);
  CHECK(est.sigma < 0.01 * v1);
  CHECK(std::abs(est.value - v1) <= 4.0 * est.sigma);

  const double v2 = unit_ball_volume_h2();
  CHECK(v2 == Catch::Approx(2.0 * M_PI * M_PI / 3.0).margin(1e-7));
  const auto est2 = ball_volume_estimate<2>(Ball<2>{}, 300000, 0x3ea50002ULL);
  CHECK(std::abs(est2.value - v2) <= 4.0 * est2.sigma);
}

TEST_CASE("dilation scales volume by lambda^Q", "[measure]") {
  const auto v1 = ball_volume_estimate<1>(Ball<1>{{}, 1.0, Metric::Koranyi}, 400000, 0x3ea51001ULL);
  const auto v2 = ball_volume_estimate<1>(Ball<1>{{}, 2.0, Metric::Koranyi}, 400000, 0x3ea51002ULL);
  const double ratio = v2.value / v1.value;
  const double sig =
      ratio * std::hypot(v1.sigma / v1.value, v2.sigma / v2.value);
  CHECK(std::abs(ratio - 16.0) <= 4.0 * sig);  // Q = 4

  const auto w1 = ball_volume_estimate<2>(Ball<2>{{}, 1.0, Metric::Koranyi}, 400000, 0x3ea51003ULL);
  const auto w2 = ball_volume_estimate<2>(Ball<2>{{}, 2.0, Metric::Koranyi}, 400000, 0x3ea51004ULL);
  const double ratio2 = w2.value / w1.value;
  const double sig2 = ratio2 * std::hypot(w1.sigma / w1.value, w2.sigma / w2.value);
  CHECK(std::abs(ratio2 - 64.0) <= 4.0 * sig2);  // Q = 6
}

TEST_CASE("volume is left-invariant", "[measure]") {
  Ball<1> moved;
  moved.center.z[0] = cplx(1.5, -2.0);
  moved.center.t = 3.0;
  const auto v0 = ball_volume_estimate<1>(Ball<1>{}, 400000, 0x3ea52001ULL);
  const auto vm = ball_volume_estimate<1>(moved, 400000, 0x3ea52002ULL);
  const double sig = std::hypot(v0.sigma, vm.sigma);
  CHECK(std::abs(vm.value - v0.value) <= 4.0 * sig);
  // translated boxes are larger (twist bound), so acceptance drops but stays workable
  CHECK(vm.acceptance > 0.05);
}

TEST_CASE("bounding box contains the whole ball", "[measure]") {
  Rng rng = derive_rng(401, 1);
  for (int trial = 0; trial < 20; ++trial) {
    Ball<1> b;
    b.center.z[0] = cplx(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0));
    b.center.t = rng.uniform(-5.0, 5.0);
    b.radius = std::exp(rng.uniform(-1.0, 1.0));
    const Box<1> box = bounding_box<1>(b);
    for (const auto& x : sphere_sample<1>(b.center, b.radius, 500, 402 + trial)) {
      const auto c = to_coords<1>(x);
      for (int i = 0; i < 3; ++i) {
        CHECK(c[i] >= box.lo[i] - 1e-12);
        CHECK(c[i] <= box.hi[i] + 1e-12);
      }
    }
  }
}

TEST_CASE("volume estimates are thread-count independent", "[measure]") {
  Ball<1> b;
  b.center.z[0] = cplx(0.7, 0.1);
  b.radius = 1.3;
  set_thread_count(1);
  const auto a = ball_volume_estimate<1>(b, 100000, 0x3ea53001ULL);
  set_thread_count(3);
  const auto c = ball_volume_estimate<1>(b, 100000, 0x3ea53001ULL);
  set_thread_count(1);
  CHECK(a.value == c.value);
  CHECK(a.sigma == c.sigma);
  CHECK(a.acceptance == c.acceptance);
}

TEST_CASE("ball means match symmetry and moment oracles", "[measure]") {
  const Ball<1> b{};
  const auto mt = integrate_over_ball<1>([](const HPoint<1>& x) { return x.t; }, b, 400000,
                                         0x3ea54001ULL);
  CHECK(std::abs(mt.value) <= 4.0 * mt.sigma);

  // mean of |z|^2 over the unit ball: (4 pi / V) int rho^3 sqrt(1-rho^4) drho = 4 / (3 pi)
  const auto mz = integrate_over_ball<1>(
      [](const HPoint<1>& x) { return horizontal_norm_sq<1>(x); }, b, 400000, 0x3ea54002ULL);
  CHECK(std::abs(mz.value - 4.0 / (3.0 * M_PI)) <= 4.0 * mz.sigma);

  CHECK_THROWS_WITH(
      integrate_over_ball<1>(
          [](const HPoint<1>&) { return std::numeric_limits<double>::quiet_NaN(); }, b, 1000,
          0x3ea54003ULL),
      Catch::Matchers::ContainsSubstring("non-finite"));
}

TEST_CASE("densities in balls", "[measure]") {
  const Ball<1> b{};
  const auto one = density_in_ball<1>([](const HPoint<1>&) { return true; }, b, 50000, 0x3ea55001ULL);
  CHECK(one.density == 1.0);
  CHECK(one.hits == one.in_ball);
  const auto none = density_in_ball<1>([](const HPoint<1>&) { return false; }, b, 50000, 0x3ea55002ULL);
  CHECK(none.density == 0.0);
  const auto half =
      density_in_ball<1>([](const HPoint<1>& x) { return x.t > 0.0; }, b, 200000, 0x3ea55003ULL);
  CHECK(std::abs(half.density - 0.5) <= 4.0 * half.sigma);
}

TEST_CASE("set sampling, diameter, and distance estimates", "[measure]") {
  const auto s = set_from_ball<1>(Ball<1>{});
  CHECK_FALSE(s.label.empty());
  for (const auto& x : sample_in_set<1>(s, 500, 403)) CHECK(koranyi_norm<1>(x) < 1.0);

  // diameter of B(0,1) is 2, achieved by antipodal horizontal pairs
  const auto diam = set_diameter_estimate<1>(s, 200, 404);
  CHECK(diam.value <= 2.0 + 1e-9);
  CHECK(diam.value >= 1.9);

  Ball<1> b1, b2;
  b1.center.z[0] = cplx(2.0, 0.0);
  b2.center.z[0] = cplx(-2.0, 0.0);
  b1.radius = b2.radius = 0.5;
  // horizontal line meets both balls: true distance is exactly 3
  const auto dist = set_distance_estimate<1>(set_from_ball<1>(b1), set_from_ball<1>(b2), 200, 405);
  CHECK(dist.value >= 3.0 - 1e-9);
  CHECK(dist.value <= 3.15);
}
