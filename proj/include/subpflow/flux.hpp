#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "subpflow/common.hpp"

namespace subpflow {

enum class FluxKind { p_laplacian, custom };

/// x-dependent flux evaluator: writes A(x, xi) into out (2n entries).
using FluxEvaluator =
    std::function<void(const double* x, const double* xi, double* out)>;
/// Optional analytic Jacobian: writes dA_i/dxi_j row-major into jac (2n x 2n).
using FluxJacobianFn =
    std::function<void(const double* x, const double* xi, double* jac)>;

/// Vector field A(x, xi) on R^{2n} with two-sided ellipticity/growth bounds
/// weighted by (delta + |xi|^2)^{(p-2)/2}. The p_laplacian kind is the model
/// flux A_i(xi) = (delta + |xi|^2)^{(p-2)/2} xi_i.
struct FluxModel {
  int n = 1;
  double p = 2.0;
  double delta = 0.0;
  FluxKind kind = FluxKind::p_laplacian;
  double lambda_struct = 1.0;
  double Lambda_struct = 1.0;
  /// Effective upper diffusivity factor for the stability estimate: the
  /// (p-1)*(delta+M^2)^{(p-2)/2} weight in stable_dt already captures the
  /// model flux's anisotropy, so this stays 1 for the p_laplacian kind.
  double lambda_eff = 1.0;
  FluxEvaluator evaluator;     // required for kind == custom
  FluxJacobianFn jacobian_fn;  // optional

  static FluxModel p_laplacian(int n, double p, double delta);
  void validate() const;
};

/// eps-lifted flux on R^{2n+1} (Riemannian approximation):
/// A^eps_i(x, xi) = Atilde_i(x, xi_H) + lambda (delta + |xi|^2)^{(p-2)/2} xi_i
/// with Atilde = (A, 0) and |xi|^2 summed over all 2n+1 components.
struct LiftedFluxModel {
  FluxModel base;
  double eps = 1.0;
  double lambda = 1.0;

  double lambda_eff() const { return base.lambda_eff + lambda; }
};

std::vector<double> eval_flux(const FluxModel& m, const double* x, const double* xi);
std::vector<double> eval_flux(const LiftedFluxModel& m, const double* x, const double* xi);

/// Additive regularization A_delta = A + lambda * delta^{(p-2)/2} * xi for a
/// degenerate base model (base.delta == 0); lambda defaults to the base
/// model's lambda_struct when NaN is passed.
FluxModel regularize(const FluxModel& m, double delta, double lambda);

/// Builds the lifted model; lambda defaults to base lambda_struct when NaN.
LiftedFluxModel lift(const FluxModel& m, double eps, double lambda);

/// The eps -> 0 limit of the lifted model evaluated on frame-scaled vectors:
/// a horizontal flux A(x, xi_H) + lambda (delta + |xi_H|^2)^{(p-2)/2} xi_H.
FluxModel lift_limit(const FluxModel& m, double lambda);

/// Analytic Jacobian where available (p_laplacian closed form, user-supplied
/// fn), otherwise central finite differences with step 1e-6 * (1 + |xi|).
std::vector<double> flux_jacobian(const FluxModel& m, const double* x, const double* xi);
std::vector<double> flux_jacobian(const LiftedFluxModel& m, const double* x, const double* xi);

/// Finite-difference Jacobian (always), used to cross-check analytic ones.
std::vector<double> flux_jacobian_fd(const FluxModel& m, const double* x, const double* xi);

struct StructureReport {
  double lambda_emp = 0.0;   // min sampled Rayleigh quotient
  double Lambda_emp = 0.0;   // max sampled Rayleigh quotient
  double growth_max = 0.0;   // max |A| / (delta+|xi|^2)^{(p-1)/2}
  bool quotients_ok = false; // within [lambda_struct, Lambda_struct] + slack
  bool growth_ok = false;    // growth_max <= Lambda_struct + slack
  long samples = 0;
};

/// Samples Rayleigh quotients eta . DA . eta / ((delta+|xi|^2)^{(p-2)/2}
/// |eta|^2) and growth ratios over random (x, xi, eta); xi magnitudes are
/// log-uniform in [1e-3, 1e3] to probe both the degenerate and the growth
/// regime.
StructureReport check_structure(const FluxModel& m, long sample_count, std::uint64_t rng_seed);
StructureReport check_structure(const LiftedFluxModel& m, long sample_count,
                                std::uint64_t rng_seed);

/// (base)^q with the conventions needed by the degenerate weights:
/// q == 0 -> 1 (even at base 0), q == 0.5 -> sqrt, q == 1 -> identity.
inline double half_power(double base, double q) {
  if (q == 0.0) return 1.0;
  if (q == 1.0) return base;
  if (q == 0.5) return std::sqrt(base);
  return std::pow(base, q);
}

}  // namespace subpflow
