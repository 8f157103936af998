#include <cmath>
#include <random>

#include "doctest.h"
#include "subpflow/flux.hpp"

using namespace subpflow;

namespace {

const double kX[3] = {0.0, 0.0, 0.0};

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

TEST_CASE("model flux closed forms") {
  const FluxModel p2 = FluxModel::p_laplacian(1, 2.0, 0.7);
  const double xi[2] = {0.3, -1.2};
  const std::vector<double> a2 = eval_flux(p2, kX, xi);
  CHECK(a2[0] == doctest::Approx(0.3));
  CHECK(a2[1] == doctest::Approx(-1.2));

  const FluxModel p4 = FluxModel::p_laplacian(1, 4.0, 1.0);
  const double ones[2] = {1.0, 1.0};
  const std::vector<double> a4 = eval_flux(p4, kX, ones);
  CHECK(a4[0] == doctest::Approx(3.0));
  CHECK(a4[1] == doctest::Approx(3.0));

  const FluxModel p3 = FluxModel::p_laplacian(1, 3.0, 0.0);
  const double zero[2] = {0.0, 0.0};
  const std::vector<double> a3 = eval_flux(p3, kX, zero);
  CHECK(a3[0] == 0.0);
  CHECK(a3[1] == 0.0);
}

TEST_CASE("regularized family") {
  const FluxModel base = FluxModel::p_laplacian(1, 4.0, 0.0);
  const FluxModel reg = regularize(base, 0.5, 1.0);

  const double zero[2] = {0.0, 0.0};
  const std::vector<double> a0 = eval_flux(reg, kX, zero);
  CHECK(a0[0] == 0.0);
  CHECK(a0[1] == 0.0);

  // p = 2: the added term is lambda * xi for every delta.
  const FluxModel base2 = FluxModel::p_laplacian(1, 2.0, 0.0);
  const double xi[2] = {0.4, -0.7};
  for (double delta : {0.1, 0.5, 0.9}) {
    const FluxModel reg2 = regularize(base2, delta, 1.0);
    const std::vector<double> a = eval_flux(reg2, kX, xi);
    CHECK(a[0] == doctest::Approx(2.0 * 0.4).epsilon(1e-14));
    CHECK(a[1] == doctest::Approx(2.0 * -0.7).epsilon(1e-14));
  }

  // Pointwise gap lambda * delta^{(p-2)/2} |xi|; halving delta at p = 4
  // halves the gap.
  const std::vector<double> a_base = eval_flux(base, kX, xi);
  auto gap = [&](double delta) {
    const std::vector<double> a = eval_flux(regularize(base, delta, 1.0), kX, xi);
    double g = 0.0;
    for (int i = 0; i < 2; ++i) g += (a[i] - a_base[i]) * (a[i] - a_base[i]);
    return std::sqrt(g);
  };
  const double norm_xi = std::sqrt(0.4 * 0.4 + 0.49);
  CHECK(gap(0.5) == doctest::Approx(0.5 * norm_xi).epsilon(1e-12));
  CHECK(gap(0.25) == doctest::Approx(0.5 * gap(0.5)).epsilon(1e-12));

  // sup over a compact ball of |A_delta - A| decays linearly in
  // delta^{(p-2)/2}.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (double delta : {0.4, 0.1}) {
    const FluxModel r = regularize(base, delta, 1.0);
    double sup = 0.0, xin = 0.0;
    for (int s = 0; s < 200; ++s) {
      double xi_s[2] = {u(rng), u(rng)};
      const std::vector<double> a = eval_flux(r, kX, xi_s);
      const std::vector<double> b = eval_flux(base, kX, xi_s);
      double d = 0.0, n = 0.0;
      for (int i = 0; i < 2; ++i) {
        d += (a[i] - b[i]) * (a[i] - b[i]);
        n += xi_s[i] * xi_s[i];
      }
      if (std::sqrt(d) > sup) {
        sup = std::sqrt(d);
        xin = std::sqrt(n);
      }
    }
    CHECK(sup == doctest::Approx(delta * xin).epsilon(1e-10));  // (p-2)/2 = 1
  }

  CHECK_THROWS_AS(regularize(base, 1.5, 1.0), ValidationError);
  CHECK_THROWS_AS(regularize(FluxModel::p_laplacian(1, 3.0, 0.2), 0.5, 1.0), ValidationError);
}

TEST_CASE("lifted flux and its eps -> 0 limit") {
  const FluxModel base = FluxModel::p_laplacian(1, 3.0, 0.5);
  const LiftedFluxModel lm = lift(base, 0.5, 1.0);

  const double zero[3] = {0.0, 0.0, 0.0};
  const std::vector<double> a0 = eval_flux(lm, kX, zero);
  for (double v : a0) CHECK(v == 0.0);

  // vertical component is lambda (delta + |xi|^2)^{(p-2)/2} xi_z
  const double xi[3] = {0.3, -0.2, 0.8};
  const std::vector<double> a = eval_flux(lm, kX, xi);
  const double w = 0.5 + 0.09 + 0.04 + 0.64;
  CHECK(a[2] == doctest::Approx(std::sqrt(w) * 0.8).epsilon(1e-13));

  // Evaluating at xi^eps = (xi_H, eps xi_z) converges to the lift_limit flux
  // on the horizontal part and to 0 on the vertical part.
  const FluxModel limit = lift_limit(base, 1.0);
  const std::vector<double> target = eval_flux(limit, kX, xi);  // reads xi_H
  double prev_gap = 0.0;
  for (int k = 0; k < 9; ++k) {
    const double eps = std::pow(0.5, k);
    const LiftedFluxModel le = lift(base, eps, 1.0);
    const double xie[3] = {xi[0], xi[1], eps * xi[2]};
    const std::vector<double> ae = eval_flux(le, kX, xie);
    double gap = std::abs(ae[2]);
    for (int i = 0; i < 2; ++i) gap = std::max(gap, std::abs(ae[i] - target[i]));
    if (k > 0) CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap < 1e-2);

  CHECK_THROWS_AS(lift(base, 0.0, 1.0), ValidationError);
}

TEST_CASE("jacobian closed forms and finite differences") {
  const FluxModel p2 = FluxModel::p_laplacian(1, 2.0, 0.3);
  const double xi[2] = {0.7, -0.4};
  const std::vector<double> j2 = flux_jacobian(p2, kX, xi);
  CHECK(j2[0] == doctest::Approx(1.0));
  CHECK(j2[1] == doctest::Approx(0.0));
  CHECK(j2[3] == doctest::Approx(1.0));

  const FluxModel p4 = FluxModel::p_laplacian(1, 4.0, 0.0);
  const double e1[2] = {1.0, 0.0};
  const std::vector<double> j4 = flux_jacobian(p4, kX, e1);
  CHECK(j4[0] == doctest::Approx(3.0));  // eigenvalue along xi
  CHECK(j4[3] == doctest::Approx(1.0));  // eigenvalue across
  CHECK(j4[1] == doctest::Approx(0.0));

  const double zero[2] = {0.0, 0.0};
  const FluxModel p3d = FluxModel::p_laplacian(1, 3.0, 1.0);
  const std::vector<double> j0 = flux_jacobian(p3d, kX, zero);
  CHECK(j0[0] == doctest::Approx(1.0));  // delta^{(p-2)/2} = 1
  CHECK(j0[3] == doctest::Approx(1.0));

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int s = 0; s < 100; ++s) {
    const double p = 2.0 + (s % 3);
    const double delta = (s % 2) ? 0.0 : 0.5;
    const FluxModel m = FluxModel::p_laplacian(1, p, delta);
    double xs[2] = {u(rng), u(rng)};
    if (delta == 0.0 && std::abs(xs[0]) + std::abs(xs[1]) < 1e-3) xs[0] += 0.1;
    const std::vector<double> ja = flux_jacobian(m, kX, xs);
    const std::vector<double> jf = flux_jacobian_fd(m, kX, xs);
    double scale = 1.0;
    for (double v : ja) scale = std::max(scale, std::abs(v));
    CHECK(max_abs_diff(ja, jf) < 1e-6 * scale);
    // symmetry
    CHECK(std::abs(ja[1] - ja[2]) < 1e-10 * scale);
  }
}

TEST_CASE("structure sampling") {
  // p = 3: quotients within [1, 2]
  const StructureReport r3 = check_structure(FluxModel::p_laplacian(1, 3.0, 0.1), 5000, 42);
  CHECK(r3.lambda_emp >= 1.0 - 1e-6);
  CHECK(r3.Lambda_emp <= 2.0 + 1e-6);
  CHECK(r3.quotients_ok);
  CHECK(r3.growth_ok);

  // p = 2: all quotients equal 1
  const StructureReport r2 = check_structure(FluxModel::p_laplacian(1, 2.0, 0.0), 2000, 43);
  CHECK(r2.lambda_emp == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r2.Lambda_emp == doctest::Approx(1.0).epsilon(1e-9));

  // regularized family keeps the lower bound
  const FluxModel reg = regularize(FluxModel::p_laplacian(1, 3.0, 0.0), 0.25, 1.0);
  const StructureReport rr = check_structure(reg, 5000, 44);
  CHECK(rr.lambda_emp >= reg.lambda_struct * (1.0 - 1e-6));
  CHECK(rr.quotients_ok);

  // lifted model with lambda = 1: lower quotient >= 1
  const LiftedFluxModel lm = lift(FluxModel::p_laplacian(1, 3.0, 0.2), 0.5, 1.0);
  const StructureReport rl = check_structure(lm, 5000, 45);
  CHECK(rl.lambda_emp >= 1.0 - 1e-6);
  CHECK(rl.quotients_ok);
}

TEST_CASE("monotonicity of the model flux") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (double p : {2.0, 3.0, 4.0}) {
    const FluxModel m = FluxModel::p_laplacian(1, p, 0.1);
    for (int s = 0; s < 500; ++s) {
      double x1[2] = {u(rng), u(rng)};
      double x2[2] = {u(rng), u(rng)};
      const std::vector<double> a1 = eval_flux(m, kX, x1);
      const std::vector<double> a2 = eval_flux(m, kX, x2);
      double dot = 0.0;
      for (int i = 0; i < 2; ++i) dot += (a1[i] - a2[i]) * (x1[i] - x2[i]);
      CHECK(dot >= -1e-12);
    }
  }
}

TEST_CASE("non-finite input raises") {
  const FluxModel m = FluxModel::p_laplacian(1, 3.0, 0.1);
  const double bad[2] = {std::numeric_limits<double>::quiet_NaN(), 0.0};
  CHECK_THROWS_AS(eval_flux(m, kX, bad), ValidationError);
  CHECK_THROWS_AS(flux_jacobian(m, kX, bad), ValidationError);
}
