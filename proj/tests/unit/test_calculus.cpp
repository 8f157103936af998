#include <cmath>
#include <random>

#include "doctest.h"
#include "subpflow/calculus.hpp"
#include "subpflow/presets.hpp"

using namespace subpflow;

namespace {

GridSpec cube_grid(int m, double half = 1.0, int n = 1) {
  GridSpec g;
  g.n = n;
  g.box_lo.assign(2 * n + 1, -half);
  g.box_hi.assign(2 * n + 1, half);
  g.m.assign(2 * n + 1, m);
  g.t0 = 0.0;
  g.t1 = 1.0;
  g.nt = 1;
  g.validate();
  return g;
}

double max_abs_interior(const GridSpec& g, const Field& f, int layers) {
  double worst = 0.0;
  for (std::size_t i = 0; i < g.space_size(); ++i)
    if (kernels::is_deep_interior(g, i, layers))
      worst = std::max(worst, std::abs(f.values()[i]));
  return worst;
}

double max_abs_diff(const Field& a, const Field& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i)
    worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  return worst;
}

// Measured convergence order from errors at h and h/2.
double order_of(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

}  // namespace

TEST_CASE("X_i is exact on affine functions everywhere") {
  const GridSpec g = cube_grid(17);
  const Field f = sample_slice(g, [](const double* x) {
    return 1.5 + 2.0 * x[0] - 0.5 * x[1] + 3.0 * x[2];
  });
  // X_1 f = 2 - (x_2/2)*3, X_2 f = -0.5 + (x_1/2)*3, Z f = 3.
  const Field x1 = apply_x(0, f);
  const Field x2 = apply_x(1, f);
  const Field zf = apply_z(f);
  const Field e1 = sample_slice(g, [](const double* x) { return 2.0 - 1.5 * x[1]; });
  const Field e2 = sample_slice(g, [](const double* x) { return -0.5 + 1.5 * x[0]; });
  CHECK(max_abs_diff(x1, e1) < 1e-13);
  CHECK(max_abs_diff(x2, e2) < 1e-13);
  for (double v : zf.values()) CHECK(v == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("X_1 of x_1 and of z match the frame") {
  const GridSpec g = cube_grid(9);
  const Field fx = sample_slice(g, [](const double* x) { return x[0]; });
  const Field x1fx = apply_x(0, fx);
  for (double v : x1fx.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

  const Field fz = preset_vertical(g, 1.0);
  const Field x1fz = apply_x(0, fz);
  const Field expect = sample_slice(g, [](const double* x) { return -0.5 * x[1]; });
  CHECK(max_abs_diff(x1fz, expect) < 1e-14);
}

TEST_CASE("second-order convergence of X_1 on sin(x_1)") {
  double errs[3];
  int k = 0;
  for (int m : {17, 33, 65}) {
    const GridSpec g = cube_grid(m);
    const Field f = sample_slice(g, [](const double* x) { return std::sin(x[0]); });
    const Field d = apply_x(0, f);
    const Field exact = sample_slice(g, [](const double* x) { return std::cos(x[0]); });
    Field diff = d;
    for (std::size_t i = 0; i < diff.values().size(); ++i)
      diff.values()[i] -= exact.values()[i];
    errs[k++] = max_abs_interior(g, diff, 1);
  }
  CHECK(order_of(errs[0], errs[1]) > 1.9);
  CHECK(order_of(errs[1], errs[2]) > 1.9);
}

TEST_CASE("apply_z: exactness and order 2 on sin(z)") {
  const GridSpec g = cube_grid(17);
  const Field fz = preset_vertical(g, 1.0);
  const Field one = apply_z(fz);
  for (double v : one.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));
  const Field fx = sample_slice(g, [](const double* x) { return x[0]; });
  const Field zero = apply_z(fx);
  for (double v : zero.values()) CHECK(std::abs(v) < 1e-14);

  double errs[2];
  int k = 0;
  for (int m : {17, 33}) {
    const GridSpec gg = cube_grid(m);
    const Field f = sample_slice(gg, [](const double* x) { return std::sin(x[2]); });
    const Field d = apply_z(f);
    const Field exact = sample_slice(gg, [](const double* x) { return std::cos(x[2]); });
    Field diff = d;
    for (std::size_t i = 0; i < diff.values().size(); ++i)
      diff.values()[i] -= exact.values()[i];
    errs[k++] = max_abs_interior(gg, diff, 1);
  }
  CHECK(order_of(errs[0], errs[1]) > 1.9);
}

TEST_CASE("horizontal gradient of z gives the rotation field") {
  const GridSpec g = cube_grid(9);
  const Field fz = preset_vertical(g, 1.0);
  const VectorField grad = horizontal_gradient(fz);
  REQUIRE(grad.size() == 2);
  const Field e1 = sample_slice(g, [](const double* x) { return -0.5 * x[1]; });
  const Field e2 = sample_slice(g, [](const double* x) { return 0.5 * x[0]; });
  CHECK(max_abs_diff(grad[0], e1) < 1e-14);
  CHECK(max_abs_diff(grad[1], e2) < 1e-14);

  const Field zero = preset_zero(g);
  const VectorField zgrad = horizontal_gradient(zero);
  for (int i = 0; i < 2; ++i)
    for (double v : zgrad[i].values()) CHECK(v == 0.0);
}

TEST_CASE("epsilon gradient components and eps=0 limit") {
  const GridSpec g = cube_grid(9);
  const Field fz = preset_vertical(g, 1.0);
  const VectorField ge = epsilon_gradient(fz, 1.0);
  REQUIRE(ge.size() == 3);
  for (std::size_t i = 0; i < g.space_size(); ++i)
    CHECK(ge[2].values()[i] == doctest::Approx(1.0).epsilon(1e-13));

  const Field fx = sample_slice(g, [](const double* x) { return x[0]; });
  const VectorField g0 = epsilon_gradient(fx, 0.0);
  const VectorField gh = horizontal_gradient(fx);
  CHECK(max_abs_diff(g0[0], gh[0]) == 0.0);
  CHECK(max_abs_diff(g0[1], gh[1]) == 0.0);
  for (double v : g0[2].values()) CHECK(v == 0.0);
}

TEST_CASE("horizontal divergence identities") {
  const GridSpec g = cube_grid(11);
  // Constant field has zero divergence everywhere (one-sided stencils are
  // exact on constants too).
  VectorField F;
  F.components.push_back(sample_slice(g, [](const double*) { return 1.0; }));
  F.components.push_back(sample_slice(g, [](const double*) { return 1.0; }));
  const Field d0 = horizontal_divergence(F);
  for (double v : d0.values()) CHECK(std::abs(v) < 1e-14);

  // The rotation field (-x2/2, x1/2) is exactly divergence free.
  VectorField R;
  R.components.push_back(sample_slice(g, [](const double* x) { return -0.5 * x[1]; }));
  R.components.push_back(sample_slice(g, [](const double* x) { return 0.5 * x[0]; }));
  const Field dr = horizontal_divergence(R);
  for (double v : dr.values()) CHECK(std::abs(v) < 1e-14);

  // div grad(x1^2) = X_1 X_1 x1^2 = 2 in the interior.
  const Field f = sample_slice(g, [](const double* x) { return x[0] * x[0]; });
  const Field lap = horizontal_divergence(horizontal_gradient(f));
  CHECK(std::abs(max_abs_interior(g, lap, 2) - 2.0) < 1e-12);

  // Fused z-flux assembly agrees with the naive sum of apply_x.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VectorField W;
  for (int i = 0; i < 2; ++i) {
    Field c(g, FieldKind::slice);
    for (double& v : c.values()) v = u(rng);
    W.components.push_back(std::move(c));
  }
  const Field fused = horizontal_divergence(W);
  Field naive(g, FieldKind::slice);
  for (int i = 0; i < 2; ++i) {
    const Field xi = apply_x(i, W[i]);
    for (std::size_t k = 0; k < naive.values().size(); ++k)
      naive.values()[k] += xi.values()[k];
  }
  CHECK(max_abs_diff(fused, naive) < 1e-12);
}

TEST_CASE("second horizontal derivatives") {
  const GridSpec g = cube_grid(11);
  const Field f = sample_slice(g, [](const double* x) { return x[0] * x[0]; });
  const MatrixField h = second_horizontal(f);
  // entry (0,0) = 2 in the interior, others 0
  for (std::size_t i = 0; i < g.space_size(); ++i) {
    if (!kernels::is_deep_interior(g, i, 2)) continue;
    CHECK(h.at(0, 0).values()[i] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(h.at(0, 1).values()[i]) < 1e-13);
    CHECK(std::abs(h.at(1, 1).values()[i]) < 1e-13);
  }
  // X_1 X_2 z = X_1(x_1/2) = 1/2 exactly in the interior.
  const Field fz = preset_vertical(g, 1.0);
  const MatrixField hz = second_horizontal(fz);
  for (std::size_t i = 0; i < g.space_size(); ++i)
    if (kernels::is_deep_interior(g, i, 2))
      CHECK(hz.at(0, 1).values()[i] == doctest::Approx(0.5).epsilon(1e-12));

  const Field zero = preset_zero(g);
  const Field hn = second_horizontal_norm2(zero);
  for (double v : hn.values()) CHECK(v == 0.0);
}

TEST_CASE("commutator structure [X_1, X_2] = Z") {
  const GridSpec g = cube_grid(17);
  CHECK(commutator_defect(preset_vertical(g, 1.0)) < 1e-13);
  CHECK(commutator_defect(sample_slice(g, [](const double*) { return 4.0; })) < 1e-14);

  // The measured max must sit at an interior point of the box for the order
  // to read cleanly; on [-2, 2]^3 the truncation coefficient peaks inside.
  double errs[2];
  int k = 0;
  for (int m : {17, 33}) {
    const GridSpec gg = cube_grid(m, 2.0);
    const Field f = sample_slice(gg, [](const double* x) {
      return std::sin(x[0]) * std::sin(x[1]) * std::sin(x[2]);
    });
    errs[k++] = commutator_defect(f);
  }
  CHECK(order_of(errs[0], errs[1]) > 1.9);
}

TEST_CASE("spacetime quadrature") {
  GridSpec g = cube_grid(9);
  g.nt = 4;
  const Field one = sample_spacetime(g, [](const double*, double) { return 1.0; });
  CHECK(integrate_spacetime(one) == doctest::Approx(8.0).epsilon(1e-13));

  const Field odd = sample_spacetime(g, [](const double* x, double) { return x[0]; });
  CHECK(std::abs(integrate_spacetime(odd)) < 1e-13);

  const Field sq = sample_spacetime(g, [](const double* x, double) { return x[0] * x[0]; });
  const double h = g.spacing(0);
  CHECK(integrate_spacetime(sq) == doctest::Approx(8.0 / 3.0).epsilon(h * h));

  // linearity and monotonicity
  const Field f = sample_spacetime(g, [](const double* x, double t) {
    return 0.3 + x[1] * t;
  });
  const Field gfun = sample_spacetime(g, [](const double* x, double t) {
    return 0.6 + x[1] * t + x[2] * x[2];
  });
  Field sum = f;
  for (std::size_t i = 0; i < sum.values().size(); ++i) sum.values()[i] += gfun.values()[i];
  CHECK(integrate_spacetime(sum) ==
        doctest::Approx(integrate_spacetime(f) + integrate_spacetime(gfun)).epsilon(1e-12));
  CHECK(integrate_spacetime(f) <= integrate_spacetime(gfun));

  // weights: a slice broadcasts over time, a spacetime weight multiplies
  // slice by slice
  const Field wslice = sample_slice(g, [](const double* x) { return 1.0 + x[2] * x[2]; });
  const Field wfull = sample_spacetime(g, [](const double* x, double t) {
    return (1.0 + x[2] * x[2]) * (1.0 + t);
  });
  const Field prod = sample_spacetime(g, [](const double* x, double t) {
    return (0.3 + x[1] * t) * (1.0 + x[2] * x[2]);
  });
  CHECK(integrate_spacetime(f, &wslice) ==
        doctest::Approx(integrate_spacetime(prod)).epsilon(1e-12));
  const Field prod2 = sample_spacetime(g, [](const double* x, double t) {
    return (0.3 + x[1] * t) * (1.0 + x[2] * x[2]) * (1.0 + t);
  });
  CHECK(integrate_spacetime(f, &wfull) ==
        doctest::Approx(integrate_spacetime(prod2)).epsilon(1e-12));

  // extent mismatches are rejected
  GridSpec g2 = g;
  g2.m[0] = 11;
  const Field wrong(g2, FieldKind::slice);
  CHECK_THROWS_AS(integrate_spacetime(f, &wrong), ValidationError);
  CHECK_THROWS_AS(integrate_spacetime(wrong), ValidationError);
  CHECK_THROWS_AS(sup_over_cylinder(wrong, CylinderSpec{}), ValidationError);
}

TEST_CASE("sup over cylinder") {
  GridSpec g = cube_grid(17);
  g.t0 = 0.0;
  g.t1 = 1.0;
  g.nt = 10;
  CylinderSpec c;
  c.center = HeisenbergPoint::origin(1);
  c.r = 1.0;
  c.mu = 1.0;
  c.t0 = 1.0;

  const Field one = sample_spacetime(g, [](const double*, double) { return 1.0; });
  CHECK(sup_over_cylinder(one, c) == doctest::Approx(1.0));

  const Field tfield = sample_spacetime(g, [](const double*, double t) { return t; });
  CHECK(sup_over_cylinder(tfield, c) == doctest::Approx(1.0));

  // sup of the gauge over the radius-1 ball stays below 1 and approaches it.
  const Field gauge = sample_spacetime(g, [](const double* x, double) {
    HeisenbergPoint p(1, {x[0], x[1], x[2]});
    return koranyi_gauge(p);
  });
  const double s17 = sup_over_cylinder(gauge, c);
  CHECK(s17 < 1.0);
  GridSpec g2 = cube_grid(33);
  g2.nt = 10;
  const Field gauge2 = sample_spacetime(g2, [](const double* x, double) {
    HeisenbergPoint p(1, {x[0], x[1], x[2]});
    return koranyi_gauge(p);
  });
  CHECK(sup_over_cylinder(gauge2, c) > s17);

  CylinderSpec far = c;
  far.center = HeisenbergPoint(1, {50.0, 0.0, 0.0});
  CHECK_THROWS_AS(sup_over_cylinder(one, far), ValidationError);
}

TEST_CASE("summation-by-parts defect vanishes for compact support") {
  const GridSpec g = cube_grid(17);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    Field f(g, FieldKind::slice), h(g, FieldKind::slice);
    for (std::size_t i = 0; i < g.space_size(); ++i) {
      if (!kernels::is_deep_interior(g, i, 2)) continue;
      f.values()[i] = u(rng);
      h.values()[i] = u(rng);
    }
    for (int i = 0; i < 2; ++i) {
      const double defect = sbp_defect(f, h, i);
      // normalize by the magnitude of the products being cancelled
      const Field xf = apply_x(i, f);
      const Field xh = apply_x(i, h);
      double scale = 0.0;
      for (std::size_t k = 0; k < g.space_size(); ++k)
        scale += std::abs(xf.values()[k] * h.values()[k]) +
                 std::abs(f.values()[k] * xh.values()[k]);
      scale *= g.cell_volume();
      CHECK(defect < 1e-12 * scale);
    }
  }
  // zero inputs give zero defect, also against a nonzero partner
  const Field z(g, FieldKind::slice);
  CHECK(sbp_defect(z, z, 0) == 0.0);
  Field fr(g, FieldKind::slice);
  for (std::size_t i = 0; i < g.space_size(); ++i)
    if (kernels::is_deep_interior(g, i, 2)) fr.values()[i] = u(rng);
  CHECK(sbp_defect(fr, z, 1) == 0.0);
  CHECK(sbp_defect(z, fr, 1) == 0.0);

  // support violation raises
  Field bad(g, FieldKind::slice, 1.0);
  CHECK_THROWS_AS(sbp_defect(bad, z, 0), ValidationError);
}

TEST_CASE("serial and parallel kernels are bit-identical") {
  const GridSpec g = cube_grid(17);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field f(g, FieldKind::slice);
  for (double& v : f.values()) v = u(rng);

  for (int i = 0; i < 2; ++i) {
    const Field a = apply_x(i, f, Exec::serial);
    const Field b = apply_x(i, f, Exec::parallel);
    CHECK(max_abs_diff(a, b) == 0.0);
  }
  const Field zs = apply_z(f, Exec::serial);
  const Field zp = apply_z(f, Exec::parallel);
  CHECK(max_abs_diff(zs, zp) == 0.0);

  const double is = integrate_slice(g, f.values(), {}, Exec::serial);
  const double ip = integrate_slice(g, f.values(), {}, Exec::parallel);
  CHECK(is == ip);

  VectorField F;
  F.components.push_back(f);
  F.components.push_back(apply_z(f));
  const Field ds = horizontal_divergence(F, Exec::serial);
  const Field dp = horizontal_divergence(F, Exec::parallel);
  CHECK(max_abs_diff(ds, dp) == 0.0);
}
