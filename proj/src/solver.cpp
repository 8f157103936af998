#include "subpflow/solver.hpp"

#include <algorithm>
#include <cmath>

namespace subpflow {

namespace {

constexpr long kMaxSubsteps = 20'000'000;

struct FrameTerm {
  int deriv_axis;
  int coef_axis;
  double sign;
};

FrameTerm frame_term(const GridSpec& g, int i) {
  if (i < g.n) return {i, g.n + i, -1.0};
  return {i, i - g.n, +1.0};
}

enum class FluxPath { plap, lifted_plap, custom, lifted_custom };

// Scratch buffers and fused passes for one explicit step. All loops go
// through the kernels layer, so serial and parallel execution match bitwise.
class StepEngine {
 public:
  StepEngine(const ProblemSpec& spec, Exec exec)
      : spec_(spec), g_(spec.grid), exec_(exec) {
    lifted_ = spec.lifted();
    const FluxModel& base = spec.base_flux();
    ncomp_ = 2 * g_.n + (lifted_ ? 1 : 0);
    if (lifted_) {
      const auto& lm = std::get<LiftedFluxModel>(spec.flux);
      eps_ = lm.eps;
      lift_lambda_ = lm.lambda;
      path_ = base.kind == FluxKind::p_laplacian ? FluxPath::lifted_plap
                                                 : FluxPath::lifted_custom;
    } else {
      path_ = base.kind == FluxKind::p_laplacian ? FluxPath::plap : FluxPath::custom;
    }
    const std::size_t nn = g_.space_size();
    grad_.assign(ncomp_, std::vector<double>(nn));
    flux_.assign(ncomp_, std::vector<double>(nn));
    di_.resize(nn);
    dz_.resize(nn);
    zflux_.resize(nn);
    tmp_.resize(nn);
    div_.resize(nn);
  }

  void compute_gradient(const double* u) {
    kernels::axis_derivative(g_, u, dz_.data(), g_.z_axis(), exec_);
    for (int i = 0; i < 2 * g_.n; ++i) {
      const FrameTerm ft = frame_term(g_, i);
      kernels::axis_derivative(g_, u, di_.data(), ft.deriv_axis, exec_);
      kernels::frame_combine(g_, di_.data(), dz_.data(), ft.coef_axis, ft.sign,
                             grad_[i].data(), exec_);
    }
    if (lifted_) {
      double* gz = grad_[2 * g_.n].data();
      const double* dz = dz_.data();
      const double eps = eps_;
      kernels::for_each_node(g_, exec_, [=](std::size_t idx) { gz[idx] = eps * dz[idx]; });
    }
  }

  double max_gradient_norm2() const {
    return kernels::plane_max(g_, exec_, [&](std::size_t idx) {
      double s = 0.0;
      for (int c = 0; c < ncomp_; ++c) s += grad_[c][idx] * grad_[c][idx];
      return s;
    });
  }

  void compute_flux() {
    const FluxModel& base = spec_.base_flux();
    const int nh = 2 * g_.n;
    const double q = 0.5 * (base.p - 2.0);
    const double delta = base.delta;
    switch (path_) {
      case FluxPath::plap: {
        kernels::for_each_node(g_, exec_, [&](std::size_t idx) {
          double w = delta;
          for (int c = 0; c < nh; ++c) w += grad_[c][idx] * grad_[c][idx];
          const double f = half_power(w, q);
          for (int c = 0; c < nh; ++c) flux_[c][idx] = f * grad_[c][idx];
        });
        break;
      }
      case FluxPath::lifted_plap: {
        const double lambda = lift_lambda_;
        kernels::for_each_node(g_, exec_, [&](std::size_t idx) {
          double wh = delta;
          for (int c = 0; c < nh; ++c) wh += grad_[c][idx] * grad_[c][idx];
          const double gz = grad_[nh][idx];
          const double w = wh + gz * gz;
          const double fh = half_power(wh, q);
          const double f2 = lambda * half_power(w, q);
          for (int c = 0; c < nh; ++c) flux_[c][idx] = (fh + f2) * grad_[c][idx];
          flux_[nh][idx] = f2 * gz;
        });
        break;
      }
      case FluxPath::custom: {
        kernels::for_each_node(g_, exec_, [&](std::size_t idx) {
          double x[16], xi[16], out[16];
          g_.coords_at(idx, x);
          for (int c = 0; c < nh; ++c) xi[c] = grad_[c][idx];
          base.evaluator(x, xi, out);
          for (int c = 0; c < nh; ++c) flux_[c][idx] = out[c];
        });
        break;
      }
      case FluxPath::lifted_custom: {
        const double lambda = lift_lambda_;
        kernels::for_each_node(g_, exec_, [&](std::size_t idx) {
          double x[16], xi[16], out[16];
          g_.coords_at(idx, x);
          for (int c = 0; c < nh; ++c) xi[c] = grad_[c][idx];
          base.evaluator(x, xi, out);
          const double gz = grad_[nh][idx];
          double w = delta + gz * gz;
          for (int c = 0; c < nh; ++c) w += xi[c] * xi[c];
          const double f2 = lambda * half_power(w, q);
          for (int c = 0; c < nh; ++c) flux_[c][idx] = out[c] + f2 * xi[c];
          flux_[nh][idx] = f2 * gz;
        });
        break;
      }
    }
  }

  void compute_divergence() {
    std::fill(div_.begin(), div_.end(), 0.0);
    std::fill(zflux_.begin(), zflux_.end(), 0.0);
    for (int i = 0; i < 2 * g_.n; ++i) {
      const FrameTerm ft = frame_term(g_, i);
      kernels::axis_derivative(g_, flux_[i].data(), tmp_.data(), ft.deriv_axis, exec_);
      kernels::add_into(g_, tmp_.data(), div_.data(), exec_);
      kernels::coeff_axpy(g_, flux_[i].data(), ft.coef_axis, ft.sign, zflux_.data(), exec_);
    }
    if (lifted_) {
      const double* fz = flux_[2 * g_.n].data();
      double* zf = zflux_.data();
      const double eps = eps_;
      kernels::for_each_node(g_, exec_, [=](std::size_t idx) { zf[idx] += eps * fz[idx]; });
    }
    kernels::axis_derivative(g_, zflux_.data(), tmp_.data(), g_.z_axis(), exec_);
    kernels::add_into(g_, tmp_.data(), div_.data(), exec_);
  }

  /// Interior update u_new = u + dt * div; faces come from boundary data.
  void apply_update(const double* u, double dt, double t_new, double* u_new) {
    const double* div = div_.data();
    kernels::for_each_node(g_, exec_, [&](std::size_t idx) {
      u_new[idx] = kernels::is_interior(g_, idx) ? u[idx] + dt * div[idx] : u[idx];
    });
    if (spec_.boundary == BoundaryMode::prescribed) {
      kernels::for_each_node(g_, exec_, [&](std::size_t idx) {
        if (!kernels::is_interior(g_, idx)) {
          double x[16];
          g_.coords_at(idx, x);
          u_new[idx] = spec_.boundary_fn(x, t_new);
        }
      });
    }
  }

  double stable_dt_from_gradient() const {
    const FluxModel& base = spec_.base_flux();
    const double m2 = max_gradient_norm2();
    const double b = g_.frame_coeff_bound();
    const double diffusivity = spec_.lambda_eff() * (base.p - 1.0) *
                               half_power(base.delta + m2, 0.5 * (base.p - 2.0)) *
                               (1.0 + b * b);
    const double h = g_.min_spacing();
    return spec_.c_stab * h * h / diffusivity;
  }

  std::span<const std::vector<double>> gradients() const { return grad_; }
  std::span<const std::vector<double>> fluxes() const { return flux_; }
  int ncomp() const { return ncomp_; }
  double eps() const { return eps_; }

 private:
  const ProblemSpec& spec_;
  const GridSpec& g_;
  Exec exec_;
  bool lifted_ = false;
  int ncomp_ = 0;
  double eps_ = 0.0;
  double lift_lambda_ = 0.0;
  FluxPath path_ = FluxPath::plap;
  std::vector<std::vector<double>> grad_, flux_;
  std::vector<double> di_, dz_, zflux_, tmp_, div_;
};

double max_abs(const GridSpec& g, const double* v, Exec exec) {
  return kernels::plane_max(g, exec, [=](std::size_t idx) { return std::abs(v[idx]); });
}

}  // namespace

void ProblemSpec::validate() const {
  grid.validate();
  const FluxModel& base = base_flux();
  base.validate();
  if (base.n != grid.n) throw ValidationError("ProblemSpec: flux and grid dimension mismatch");
  if (grid.dims() > 16) throw ValidationError("ProblemSpec: n too large for solver buffers");
  if (initial.kind() != FieldKind::slice || initial.slice_size() != grid.space_size())
    throw ValidationError("ProblemSpec: initial slice does not match the grid");
  if (!initial.finite()) throw ValidationError("ProblemSpec: initial data must be finite");
  if (!(c_stab > 0.0 && c_stab <= 1.0)) throw ValidationError("ProblemSpec: c_stab in (0, 1]");
  if (lifted() && !(std::get<LiftedFluxModel>(flux).eps > 0.0))
    throw ValidationError("ProblemSpec: lifted model needs eps > 0");
  if (boundary == BoundaryMode::prescribed) {
    if (!boundary_fn) throw ValidationError("ProblemSpec: prescribed boundary needs boundary_fn");
    // Boundary data must be continuous with the initial trace at t0.
    double x[16];
    for (std::size_t idx = 0; idx < grid.space_size(); ++idx) {
      if (kernels::is_interior(grid, idx)) continue;
      grid.coords_at(idx, x);
      const double b = boundary_fn(x, grid.t0);
      if (std::abs(b - initial.at(idx)) > 1e-12 * (1.0 + std::abs(b)))
        throw ValidationError("ProblemSpec: boundary data discontinuous with initial at t0");
    }
  }
}

double stable_dt(const ProblemSpec& spec, const Field& slice, Exec exec) {
  if (!slice.finite()) throw ValidationError("stable_dt: slice has non-finite values");
  StepEngine engine(spec, exec);
  engine.compute_gradient(slice.values().data());
  return engine.stable_dt_from_gradient();
}

Field step(const ProblemSpec& spec, const Field& slice, double dt, Exec exec) {
  StepEngine engine(spec, exec);
  engine.compute_gradient(slice.values().data());
  engine.compute_flux();
  engine.compute_divergence();
  Field out(spec.grid, FieldKind::slice);
  engine.apply_update(slice.values().data(), dt, spec.grid.t0 + dt, out.values().data());
  const double guard = 10.0 * max_abs(spec.grid, slice.values().data(), exec);
  const double now = max_abs(spec.grid, out.values().data(), exec);
  if (!std::isfinite(now) || (guard > 0.0 && now > guard))
    throw InstabilityError("step: growth guard tripped", 0, spec.grid.t0 + dt, now);
  return out;
}

namespace {

Solution solve_impl(const ProblemSpec& spec, Exec exec) {
  spec.validate();
  const GridSpec& g = spec.grid;
  Solution sol;
  sol.spec = spec;
  sol.u = Field(g, FieldKind::spacetime);

  std::vector<double> cur(spec.initial.values().begin(), spec.initial.values().end());
  std::vector<double> next(cur.size());
  std::copy(cur.begin(), cur.end(), sol.u.slice(0).begin());

  StepEngine engine(spec, exec);
  const double init_max = max_abs(g, cur.data(), exec);
  double t = g.t0;
  long steps = 0;
  for (int k = 1; k <= g.nt; ++k) {
    const double target = g.out_time(k);
    while (t < target) {
      engine.compute_gradient(cur.data());
      double dt = engine.stable_dt_from_gradient();
      if (!(dt > 0.0) || !std::isfinite(dt))
        throw InstabilityError("solve: degenerate stable dt", static_cast<int>(steps), t, dt);
      bool landing = false;
      if (dt >= (target - t) * (1.0 - 1e-12)) {
        dt = target - t;
        landing = true;
      }
      engine.compute_flux();
      engine.compute_divergence();
      engine.apply_update(cur.data(), dt, landing ? target : t + dt, next.data());
      cur.swap(next);
      t = landing ? target : t + dt;
      ++steps;

      StepDiagnostics diag;
      diag.t = t;
      diag.dt = dt;
      diag.max_abs_u = max_abs(g, cur.data(), exec);
      diag.energy = kernels::plane_sum(g, exec, [&](std::size_t idx) {
        return kernels::node_weight(g, idx) * cur[idx] * cur[idx];
      });
      sol.dt_history.push_back(dt);
      sol.diagnostics.push_back(diag);

      if (!std::isfinite(diag.max_abs_u) ||
          (init_max > 0.0 && diag.max_abs_u > 10.0 * init_max))
        throw InstabilityError("solve: growth guard tripped", static_cast<int>(steps), t,
                               diag.max_abs_u);
      if (steps > kMaxSubsteps)
        throw InstabilityError("solve: step limit exceeded", static_cast<int>(steps), t,
                               diag.max_abs_u);
    }
    std::copy(cur.begin(), cur.end(), sol.u.slice(k).begin());
  }
  return sol;
}

}  // namespace

Solution solve(const ProblemSpec& spec, Exec exec) { return solve_impl(spec, exec); }

Solution solve_lifted(const ProblemSpec& spec, Exec exec) {
  if (!spec.lifted()) throw ValidationError("solve_lifted: spec does not hold a lifted model");
  return solve_impl(spec, exec);
}

double weak_residual(const Solution& sol, const Field& phi, Exec exec) {
  const GridSpec& g = sol.spec.grid;
  if (phi.kind() != FieldKind::spacetime || phi.slice_size() != g.space_size() ||
      phi.time_levels() != g.time_levels())
    throw ValidationError("weak_residual: phi extent mismatch");
  if (g.nt < 4) throw ValidationError("weak_residual: need nt >= 4");
  // Support check: two node layers at every space face, two slices at both
  // time ends.
  for (int k = 0; k <= g.nt; ++k) {
    const double* pv = phi.slice(k).data();
    const bool end = (k <= 1 || k >= g.nt - 1);
    const double bad = kernels::plane_max(g, exec, [&](std::size_t idx) {
      if (end || !kernels::is_deep_interior(g, idx, 2)) return std::abs(pv[idx]);
      return 0.0;
    });
    if (bad != 0.0)
      throw ValidationError("weak_residual: phi must vanish near the parabolic boundary");
  }

  StepEngine engine(sol.spec, exec);
  const int nh = 2 * g.n;
  const std::size_t nn = g.space_size();
  std::vector<double> dtphi(nn), di(nn), dz(nn), xphi(nn);
  const double dt = g.dt_out();
  double total = 0.0;
  for (int k = 0; k <= g.nt; ++k) {
    const double* u = sol.u.slice(k).data();
    engine.compute_gradient(u);
    engine.compute_flux();
    // time derivative of phi (centered; one-sided second order at the ends)
    const double* pk = phi.slice(k).data();
    const double* pprev = phi.slice(std::max(0, k - 1)).data();
    const double* pnext = phi.slice(std::min(g.nt, k + 1)).data();
    if (k == 0) {
      const double* p2 = phi.slice(2).data();
      kernels::for_each_node(g, exec, [&](std::size_t i) {
        dtphi[i] = (-3.0 * pk[i] + 4.0 * pnext[i] - p2[i]) / (2.0 * dt);
      });
    } else if (k == g.nt) {
      const double* p2 = phi.slice(g.nt - 2).data();
      kernels::for_each_node(g, exec, [&](std::size_t i) {
        dtphi[i] = (3.0 * pk[i] - 4.0 * pprev[i] + p2[i]) / (2.0 * dt);
      });
    } else {
      kernels::for_each_node(g, exec, [&](std::size_t i) {
        dtphi[i] = (pnext[i] - pprev[i]) / (2.0 * dt);
      });
    }
    double slice_term = kernels::plane_sum(g, exec, [&](std::size_t i) {
      return kernels::node_weight(g, i) * u[i] * dtphi[i];
    });
    kernels::axis_derivative(g, pk, dz.data(), g.z_axis(), exec);
    auto fluxes = engine.fluxes();
    for (int i = 0; i < nh; ++i) {
      const FrameTerm ft = frame_term(g, i);
      kernels::axis_derivative(g, pk, di.data(), ft.deriv_axis, exec);
      kernels::frame_combine(g, di.data(), dz.data(), ft.coef_axis, ft.sign, xphi.data(), exec);
      const double* fi = fluxes[i].data();
      slice_term -= kernels::plane_sum(g, exec, [&](std::size_t idx) {
        return kernels::node_weight(g, idx) * fi[idx] * xphi[idx];
      });
    }
    if (sol.spec.lifted()) {
      const double* fz = fluxes[nh].data();
      const double eps = engine.eps();
      slice_term -= eps * kernels::plane_sum(g, exec, [&](std::size_t idx) {
        return kernels::node_weight(g, idx) * fz[idx] * dz[idx];
      });
    }
    total += g.time_trapezoid_weight(k) * slice_term;
  }
  return std::abs(total);
}

SliceDerivatives slice_derivatives(const Solution& sol, int k, bool want_zgrad, Exec exec) {
  const GridSpec& g = sol.spec.grid;
  if (g.nt < 2) throw ValidationError("slice_derivatives: need nt >= 2");
  const std::size_t nn = g.space_size();
  SliceDerivatives out;
  const double* u = sol.u.slice(k).data();

  std::vector<double> di(nn), dz(nn);
  kernels::axis_derivative(g, u, dz.data(), g.z_axis(), exec);
  out.zu.assign(dz.begin(), dz.end());
  out.grad.assign(2 * g.n, std::vector<double>(nn));
  for (int i = 0; i < 2 * g.n; ++i) {
    const FrameTerm ft = frame_term(g, i);
    kernels::axis_derivative(g, u, di.data(), ft.deriv_axis, exec);
    kernels::frame_combine(g, di.data(), dz.data(), ft.coef_axis, ft.sign, out.grad[i].data(),
                           exec);
  }

  out.hess_norm2.assign(nn, 0.0);
  std::vector<double> gdz(nn), entry(nn);
  for (int j = 0; j < 2 * g.n; ++j) {
    kernels::axis_derivative(g, out.grad[j].data(), gdz.data(), g.z_axis(), exec);
    for (int i = 0; i < 2 * g.n; ++i) {
      const FrameTerm ft = frame_term(g, i);
      kernels::axis_derivative(g, out.grad[j].data(), di.data(), ft.deriv_axis, exec);
      kernels::frame_combine(g, di.data(), gdz.data(), ft.coef_axis, ft.sign, entry.data(),
                             exec);
      kernels::for_each_node(g, exec, [&](std::size_t idx) {
        out.hess_norm2[idx] += entry[idx] * entry[idx];
      });
    }
  }

  out.ut.assign(nn, 0.0);
  const double dt = g.dt_out();
  if (k == 0) {
    const double* u1 = sol.u.slice(1).data();
    const double* u2 = sol.u.slice(2).data();
    kernels::for_each_node(g, exec, [&](std::size_t i) {
      out.ut[i] = (-3.0 * u[i] + 4.0 * u1[i] - u2[i]) / (2.0 * dt);
    });
  } else if (k == g.nt) {
    const double* u1 = sol.u.slice(g.nt - 1).data();
    const double* u2 = sol.u.slice(g.nt - 2).data();
    kernels::for_each_node(g, exec, [&](std::size_t i) {
      out.ut[i] = (3.0 * u[i] - 4.0 * u1[i] + u2[i]) / (2.0 * dt);
    });
  } else {
    const double* up = sol.u.slice(k + 1).data();
    const double* um = sol.u.slice(k - 1).data();
    kernels::for_each_node(g, exec, [&](std::size_t i) {
      out.ut[i] = (up[i] - um[i]) / (2.0 * dt);
    });
  }

  if (want_zgrad) {
    out.zgrad.assign(2 * g.n, std::vector<double>(nn));
    std::vector<double> zdz(nn);
    kernels::axis_derivative(g, out.zu.data(), zdz.data(), g.z_axis(), exec);
    for (int i = 0; i < 2 * g.n; ++i) {
      const FrameTerm ft = frame_term(g, i);
      kernels::axis_derivative(g, out.zu.data(), di.data(), ft.deriv_axis, exec);
      kernels::frame_combine(g, di.data(), zdz.data(), ft.coef_axis, ft.sign,
                             out.zgrad[i].data(), exec);
    }
  }
  return out;
}

DerivedFields derived_fields(const Solution& sol, Exec exec) {
  const GridSpec& g = sol.spec.grid;
  DerivedFields out;
  out.grad.components.assign(2 * g.n, Field(g, FieldKind::spacetime));
  out.zu = Field(g, FieldKind::spacetime);
  out.hess_norm = Field(g, FieldKind::spacetime);
  out.ut = Field(g, FieldKind::spacetime);
  for (int k = 0; k <= g.nt; ++k) {
    SliceDerivatives sd = slice_derivatives(sol, k, false, exec);
    for (int i = 0; i < 2 * g.n; ++i)
      std::copy(sd.grad[i].begin(), sd.grad[i].end(), out.grad[i].slice(k).begin());
    std::copy(sd.zu.begin(), sd.zu.end(), out.zu.slice(k).begin());
    std::copy(sd.ut.begin(), sd.ut.end(), out.ut.slice(k).begin());
    double* h = out.hess_norm.slice(k).data();
    for (std::size_t idx = 0; idx < g.space_size(); ++idx)
      h[idx] = std::sqrt(sd.hess_norm2[idx]);
  }
  return out;
}

}  // namespace subpflow
