#pragma once

#include <functional>
#include <variant>

#include "subpflow/calculus.hpp"
#include "subpflow/flux.hpp"

namespace subpflow {

enum class BoundaryMode { frozen_initial, prescribed };

/// Dirichlet problem for du/dt = sum_i X_i A_i(x, grad_0 u) (or its lifted
/// variant) with explicit, stability-controlled time stepping.
struct ProblemSpec {
  GridSpec grid;
  std::variant<FluxModel, LiftedFluxModel> flux = FluxModel{};
  Field initial;  // slice on `grid`
  BoundaryMode boundary = BoundaryMode::frozen_initial;
  /// Boundary trace for BoundaryMode::prescribed; must agree with `initial`
  /// on the faces at t = t0.
  std::function<double(const double* x, double t)> boundary_fn;
  double c_stab = 0.25;

  bool lifted() const { return std::holds_alternative<LiftedFluxModel>(flux); }
  const FluxModel& base_flux() const {
    return lifted() ? std::get<LiftedFluxModel>(flux).base : std::get<FluxModel>(flux);
  }
  double lambda_eff() const {
    return lifted() ? std::get<LiftedFluxModel>(flux).lambda_eff() : std::get<FluxModel>(flux).lambda_eff;
  }
  void validate() const;
};

struct StepDiagnostics {
  double t = 0.0;
  double dt = 0.0;
  double max_abs_u = 0.0;
  double energy = 0.0;  // integral of u^2 over the box
};

struct Solution {
  ProblemSpec spec;
  Field u;  // spacetime, stored at the nt+1 output times
  std::vector<double> dt_history;
  std::vector<StepDiagnostics> diagnostics;
};

/// CFL-style bound dt = c_stab * h_min^2 / (Lambda_eff (p-1)
/// (delta + M^2)^{(p-2)/2} (1 + B^2)) with M the max gradient norm on the
/// slice and B the largest |x_H|/2 over the box.
double stable_dt(const ProblemSpec& spec, const Field& slice, Exec exec = Exec::parallel);

/// One explicit Euler step; boundary nodes are re-imposed from the boundary
/// data. Throws InstabilityError when max |u| exceeds 10x the initial max.
Field step(const ProblemSpec& spec, const Field& slice, double dt, Exec exec = Exec::parallel);

/// Marches from t0 to t1 with adaptive dt, sub-stepping to land exactly on
/// the nt+1 output times.
Solution solve(const ProblemSpec& spec, Exec exec = Exec::parallel);

/// Same entry point for lifted problems (spec.flux must hold the lifted
/// model): 2n+1-component gradient and eps-frame divergence.
Solution solve_lifted(const ProblemSpec& spec, Exec exec = Exec::parallel);

/// | integral integral (u phi_t - sum_i A_i(grad u) X_i phi) | for a test
/// function vanishing near the parabolic boundary (two node layers at every
/// space face and at both time ends).
double weak_residual(const Solution& sol, const Field& phi, Exec exec = Exec::parallel);

struct DerivedFields {
  VectorField grad;  // spacetime components X_i u
  Field zu;          // spacetime
  Field hess_norm;   // spacetime, |grad_0^2 u|
  Field ut;          // spacetime, centered in time (one-sided at the ends)
};

/// Post-hoc derivative fields on every output slice. The time derivative is
/// recomputed from the stored slices, independent of the scheme's stepping.
DerivedFields derived_fields(const Solution& sol, Exec exec = Exec::parallel);

/// Per-slice derivative bundle used by streaming consumers.
struct SliceDerivatives {
  std::vector<std::vector<double>> grad;  // 2n components
  std::vector<double> zu;
  std::vector<double> hess_norm2;  // |grad_0^2 u|^2
  std::vector<double> ut;
  std::vector<std::vector<double>> zgrad;  // X_i(Zu), filled on request
};
SliceDerivatives slice_derivatives(const Solution& sol, int k, bool want_zgrad,
                                   Exec exec = Exec::parallel);

}  // namespace subpflow
