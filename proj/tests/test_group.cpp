#include <catch2/catch_amalgamated.hpp>

#include <heis/core.hpp>
#include <heis/hom.hpp>
#include <heis/rng.hpp>

using namespace heis;

namespace {

// independent reference implementation of the group law in flat coordinates
template <int N>
HPoint<N> oracle_multiply(const HPoint<N>& p, const HPoint<N>& q) {
  HPoint<N> r;
  double twist = 0.0;
  for (int j = 0; j < N; ++j) {
    const double px = p.z[j].real(), py = p.z[j].imag();
    const double qx = q.z[j].real(), qy = q.z[j].imag();
    r.z[j] = cplx(px + qx, py + qy);
    twist += 2.0 * (py * qx - px * qy);  // 2 Im(z conj(w))
  }
  r.t = p.t + q.t + twist;
  return r;
}

template <int N>
HPoint<N> rand_point(Rng& rng) {
  HPoint<N> p;
  for (int j = 0; j < N; ++j) p.z[j] = cplx(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
  p.t = rng.uniform(-4.0, 4.0);
  return p;
}

template <int N>
double max_diff(const HPoint<N>& a, const HPoint<N>& b) {
  double d = std::abs(a.t - b.t);
  for (int j = 0; j < N; ++j) d = std::max(d, std::abs(a.z[j] - b.z[j]));
  return d;
}

}  // namespace

TEST_CASE("frozen products", "[group]") {
  HPoint<1> p{}, q{};
  p.z[0] = cplx(1.0, 0.0);
  q.z[0] = cplx(0.0, 1.0);
  const HPoint<1> r = multiply<1>(p, q);
  CHECK(r.z[0].real() == 1.0);
  CHECK(r.z[0].imag() == 1.0);
  CHECK(r.t == -2.0);  // 2 Im(1 * conj(i)) = -2
  const HPoint<1> s = multiply<1>(q, p);
  CHECK(s.t == 2.0);  // non-commutative: the twist flips sign
}

TEST_CASE("group law matches the independent oracle", "[group]") {
  Rng rng = derive_rng(101, 1);
  for (int i = 0; i < 2000; ++i) {
    const auto p = rand_point<1>(rng);
    const auto q = rand_point<1>(rng);
    CHECK(max_diff<1>(multiply<1>(p, q), oracle_multiply<1>(p, q)) < 1e-14);
  }
  Rng rng2 = derive_rng(101, 2);
  for (int i = 0; i < 2000; ++i) {
    const auto p = rand_point<2>(rng2);
    const auto q = rand_point<2>(rng2);
    CHECK(max_diff<2>(multiply<2>(p, q), oracle_multiply<2>(p, q)) < 1e-14);
  }
}

TEST_CASE("group axioms", "[group]") {
  Rng rng = derive_rng(102, 1);
  double worst = 0.0;
  for (int i = 0; i < 5000; ++i) {
    const auto p = rand_point<2>(rng);
    const auto q = rand_point<2>(rng);
    const auto r = rand_point<2>(rng);
    worst = std::max(worst, max_diff<2>(multiply<2>(multiply<2>(p, q), r),
                                        multiply<2>(p, multiply<2>(q, r))));
    worst = std::max(worst, max_diff<2>(multiply<2>(p, HPoint<2>::identity()), p));
    worst = std::max(worst, max_diff<2>(multiply<2>(HPoint<2>::identity(), p), p));
    worst = std::max(worst, max_diff<2>(multiply<2>(p, inverse<2>(p)), HPoint<2>::identity()));
    worst = std::max(worst, max_diff<2>(multiply<2>(inverse<2>(p), p), HPoint<2>::identity()));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("dilations are automorphisms and compose", "[group]") {
  Rng rng = derive_rng(103, 1);
  for (int i = 0; i < 2000; ++i) {
    const auto p = rand_point<1>(rng);
    const auto q = rand_point<1>(rng);
    const double s = std::exp(rng.uniform(-1.5, 1.5));
    CHECK(max_diff<1>(dilate<1>(s, multiply<1>(p, q)),
                      multiply<1>(dilate<1>(s, p), dilate<1>(s, q))) < 1e-12);
    CHECK(max_diff<1>(dilate<1>(0.5, dilate<1>(2.0, p)), p) < 1e-13);
  }
  HPoint<1> v{};
  v.z[0] = cplx(1.0, -2.0);
  v.t = 3.0;
  const HPoint<1> w = dilate<1>(2.0, v);
  CHECK(w.z[0] == cplx(2.0, -4.0));
  CHECK(w.t == 12.0);  // t scales by s^2
}

TEST_CASE("coordinate round trip", "[group]") {
  Rng rng = derive_rng(104, 1);
  for (int i = 0; i < 500; ++i) {
    const auto p = rand_point<2>(rng);
    CHECK(max_diff<2>(from_coords<2>(to_coords<2>(p)), p) == 0.0);
  }
}

TEST_CASE("hom application agrees with matrix times coords", "[hom]") {
  HomogeneousHom<1> L = HomogeneousHom<1>::identity();
  L.A = {2.0, 0.0, 0.0, 0.5};  // anisotropic diag
  L.mu = 1.0;
  HPoint<1> p{};
  p.z[0] = cplx(0.3, -0.7);
  p.t = 0.9;
  const HPoint<1> q = hom_apply<1>(L, p);
  CHECK(q.z[0].real() == Catch::Approx(0.6).margin(1e-15));
  CHECK(q.z[0].imag() == Catch::Approx(-0.35).margin(1e-15));
  CHECK(q.t == Catch::Approx(0.9).margin(1e-15));
}

TEST_CASE("hom validation accepts morphisms and rejects non-morphisms", "[hom]") {
  // n=1: any invertible A with mu = det A is a morphism
  HomogeneousHom<1> shear = HomogeneousHom<1>::identity();
  shear.A = {1.0, 1.5, 0.0, 1.0};
  shear.mu = 1.0;
  CHECK(validate_homomorphism<1>(shear, 64, 1e-9, 7).ok);
  shear.mu = 2.0;  // wrong mu for det 1
  CHECK_FALSE(validate_homomorphism<1>(shear, 64, 1e-9, 7).ok);

  // n=2: block rotations are morphisms, axis-mixed scalings are not
  HomogeneousHom<2> rot = HomogeneousHom<2>::identity();
  const double c = std::cos(0.6), s = std::sin(0.6);
  for (int i = 0; i < 16; ++i) rot.A[static_cast<std::size_t>(i)] = 0.0;
  rot.A[0 * 4 + 0] = c;  rot.A[0 * 4 + 2] = -s;
  rot.A[2 * 4 + 0] = s;  rot.A[2 * 4 + 2] = c;
  rot.A[1 * 4 + 1] = 1.0;
  rot.A[3 * 4 + 3] = 1.0;
  rot.mu = 1.0;
  CHECK(validate_homomorphism<2>(rot, 64, 1e-9, 7).ok);

  HomogeneousHom<2> bad = HomogeneousHom<2>::identity();
  bad.A[0] = 2.0;  // stretch x1 only: breaks the symplectic pairing with y1
  bad.mu = 2.0;
  CHECK_FALSE(validate_homomorphism<2>(bad, 64, 1e-9, 7).ok);
}

TEST_CASE("hom algebra: determinant, inverse, random generation", "[hom]") {
  Rng rng = derive_rng(105, 1);
  for (int i = 0; i < 200; ++i) {
    const HomogeneousHom<1> L = random_h1_hom(rng, 8.0);
    CHECK(validate_homomorphism<1>(L, 32, 1e-8, 11).ok);
    CHECK(hom_det<1>(L) == Catch::Approx(L.mu).margin(1e-9));  // n=1: mu = det A
    const HomogeneousHom<1> Linv = hom_inverse<1>(L);
    HPoint<1> p{};
    p.z[0] = cplx(0.4, 0.2);
    p.t = -1.1;
    const HPoint<1> back = hom_apply<1>(Linv, hom_apply<1>(L, p));
    CHECK(std::abs(back.z[0] - p.z[0]) < 1e-10);
    CHECK(std::abs(back.t - p.t) < 1e-10);
    // homogeneity L(delta_s p) = delta_s L(p)
    const HPoint<1> a = hom_apply<1>(L, dilate<1>(0.25, p));
    const HPoint<1> b = dilate<1>(0.25, hom_apply<1>(L, p));
    CHECK(std::abs(a.z[0] - b.z[0]) < 1e-12);
    CHECK(std::abs(a.t - b.t) < 1e-12);
  }
}

TEST_CASE("hom jacobian is |det A| * mu", "[hom]") {
  HomogeneousHom<1> L = HomogeneousHom<1>::identity();
  L.A = {3.0, 0.0, 0.0, 1.0 / 3.0};
  L.mu = 1.0;
  CHECK(hom_jacobian<1>(L) == Catch::Approx(1.0).margin(1e-12));
  HomogeneousHom<1> D = HomogeneousHom<1>::identity();
  D.A = {2.0, 0.0, 0.0, 2.0};
  D.mu = 4.0;
  CHECK(hom_jacobian<1>(D) == Catch::Approx(16.0).margin(1e-12));  // lambda^Q, Q = 4
}
