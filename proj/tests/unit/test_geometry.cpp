#include <cmath>
#include <random>

#include "doctest.h"
#include "subpflow/geometry.hpp"

using namespace subpflow;

namespace {

HeisenbergPoint pt(double a, double b, double c) {
  return HeisenbergPoint(1, {a, b, c});
}

HeisenbergPoint random_point(std::mt19937_64& rng, int n = 1) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> c(2 * n + 1);
  for (double& v : c) v = u(rng);
  return HeisenbergPoint(n, c);
}

double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

}  // namespace

TEST_CASE("group law: identity, hand value, inverse") {
  CHECK(group_mul(pt(0, 0, 0), pt(1, 2, 3)).coords == std::vector<double>{1, 2, 3});

  const HeisenbergPoint r = group_mul(pt(1, 0, 0), pt(0, 1, 0));
  CHECK(r.coords[0] == doctest::Approx(1.0));
  CHECK(r.coords[1] == doctest::Approx(1.0));
  CHECK(r.coords[2] == doctest::Approx(0.5));

  const HeisenbergPoint q = group_mul(pt(1, 0, 0), pt(-1, 0, 0));
  CHECK(q.coords == std::vector<double>{0, 0, 0});
}

TEST_CASE("group inverse negates coordinates") {
  CHECK(group_inv(pt(1, 2, 3)).coords == std::vector<double>{-1, -2, -3});
  CHECK(group_inv(pt(0, 0, 0)).coords == std::vector<double>{0, 0, 0});
  const HeisenbergPoint a = pt(0.3, -1.2, 0.7);
  const HeisenbergPoint e = group_mul(a, group_inv(a));
  for (double c : e.coords) CHECK(std::abs(c) < 1e-15);
}

TEST_CASE("koranyi gauge closed forms") {
  CHECK(koranyi_gauge(pt(0, 0, 0)) == 0.0);
  CHECK(koranyi_gauge(pt(0, 0, 1)) == doctest::Approx(2.0));
  CHECK(koranyi_gauge(pt(1, 1, 0)) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("gauge distance hand values and symmetry") {
  CHECK(gauge_distance(pt(1, 0, 0), pt(0, 0, 0)) == doctest::Approx(1.0));
  // y^{-1} x = (0, 1, -1/2), gauge = (1 + 16/4)^{1/4} = 5^{1/4}
  CHECK(gauge_distance(pt(1, 1, 0), pt(1, 0, 0)) ==
        doctest::Approx(std::pow(5.0, 0.25)).epsilon(1e-12));
  const HeisenbergPoint x = pt(0.4, -0.2, 0.9);
  CHECK(gauge_distance(x, x) == 0.0);

  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const HeisenbergPoint a = random_point(rng), b = random_point(rng);
    CHECK(rel_diff(gauge_distance(a, b), gauge_distance(b, a)) < 1e-12);
  }
}

TEST_CASE("associativity and left invariance to 1e-12 relative") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const HeisenbergPoint a = random_point(rng), b = random_point(rng), c = random_point(rng);
    const HeisenbergPoint lhs = group_mul(group_mul(a, b), c);
    const HeisenbergPoint rhs = group_mul(a, group_mul(b, c));
    for (int k = 0; k < 3; ++k) CHECK(rel_diff(lhs.coords[k], rhs.coords[k]) < 1e-12);

    const double d0 = gauge_distance(b, c);
    const double d1 = gauge_distance(group_mul(a, b), group_mul(a, c));
    CHECK(rel_diff(d0, d1) < 1e-12);
  }
}

TEST_CASE("gauge dilation homogeneity") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ul(0.1, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const HeisenbergPoint a = random_point(rng);
    const double lambda = ul(rng);
    CHECK(rel_diff(koranyi_gauge(dilate(a, lambda)), lambda * koranyi_gauge(a)) < 1e-12);
  }
}

TEST_CASE("cylinder membership") {
  CylinderSpec c;
  c.center = HeisenbergPoint::origin(1);
  c.r = 1.0;
  c.mu = 1.0;
  c.t0 = 1.0;
  CHECK(cylinder_contains(c, pt(0, 0, 0), 1.0));
  CHECK_FALSE(cylinder_contains(c, pt(0, 0, 1), 1.0));  // gauge = 2 >= 1
  CHECK_FALSE(cylinder_contains(c, pt(0, 0, 0), -0.5));  // below t0 - mu r^2
  CHECK_FALSE(cylinder_contains(c, pt(0, 0, 0), 0.0));   // bottom excluded
  CHECK_FALSE(cylinder_contains(c, pt(0, 0, 0), 1.5));   // above the top
}

TEST_CASE("homogeneous dimension and kappa arithmetic") {
  CHECK(homogeneous_dimension(1) == 4);
  CHECK(homogeneous_dimension(2) == 6);
  const double kappa = (homogeneous_dimension(1) + 2.0) / homogeneous_dimension(1);
  CHECK(kappa == doctest::Approx(1.5));
}

TEST_CASE("monte-carlo ball volume scales like 2^N") {
  for (int n : {1, 2}) {
    const int N = homogeneous_dimension(n);
    const BallVolumeEstimate v1 = ball_volume_mc(n, 0.8, 40000, 101);
    const BallVolumeEstimate v2 = ball_volume_mc(n, 1.6, 40000, 202);
    const double ratio = v2.volume / v1.volume;
    const double sigma = ratio * std::sqrt(std::pow(v1.stderr_ / v1.volume, 2) +
                                           std::pow(v2.stderr_ / v2.volume, 2));
    CHECK(std::abs(ratio - std::pow(2.0, N)) < 3.0 * sigma);
  }
}

TEST_CASE("dimension mismatch raises") {
  HeisenbergPoint a = pt(0, 0, 0);
  HeisenbergPoint b = HeisenbergPoint::origin(2);
  CHECK_THROWS_AS(group_mul(a, b), ValidationError);
  CHECK_THROWS_AS(gauge_distance(a, b), ValidationError);
}

TEST_CASE("raw gauge distance matches the allocating path") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i) {
    const HeisenbergPoint a = random_point(rng), b = random_point(rng);
    CHECK(rel_diff(gauge_distance(a, b),
                   gauge_distance_raw(1, a.coords.data(), b.coords.data())) < 1e-13);
  }
}
