#include "subpflow/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace subpflow {

namespace {

// x^e for x >= 0 with the 0^0 = 1 convention used by the degenerate weights.
double powe(double x, double e) {
  if (e == 0.0) return 1.0;
  if (e == 1.0) return x;
  if (e == 2.0) return x * x;
  return std::pow(x, e);
}

void time_derivative_slice(const Field& f, int k, std::vector<double>& out, Exec exec) {
  const GridSpec& g = f.grid();
  const double dt = g.dt_out();
  out.resize(g.space_size());
  const double* fk = f.slice(k).data();
  if (k == 0) {
    const double* f1 = f.slice(1).data();
    const double* f2 = f.slice(2).data();
    kernels::for_each_node(g, exec, [&](std::size_t i) {
      out[i] = (-3.0 * fk[i] + 4.0 * f1[i] - f2[i]) / (2.0 * dt);
    });
  } else if (k == g.nt) {
    const double* f1 = f.slice(k - 1).data();
    const double* f2 = f.slice(k - 2).data();
    kernels::for_each_node(g, exec, [&](std::size_t i) {
      out[i] = (3.0 * fk[i] - 4.0 * f1[i] + f2[i]) / (2.0 * dt);
    });
  } else {
    const double* fp = f.slice(k + 1).data();
    const double* fm = f.slice(k - 1).data();
    kernels::for_each_node(g, exec, [&](std::size_t i) {
      out[i] = (fp[i] - fm[i]) / (2.0 * dt);
    });
  }
}

// Everything a report integrand may need on one output slice.
struct SliceCtx {
  const double* u = nullptr;
  const double* eta = nullptr;
  SliceDerivatives sd;
  std::vector<double> eta_t;
  std::vector<double> eta_gnorm;  // |grad_0 eta|
  std::vector<double> eta_z;      // Z eta
  std::vector<double> w;          // delta + |grad_0 u|^2
  std::vector<double> gnorm;      // |grad_0 u|
  std::vector<double> zgrad_norm; // |grad_0 Zu|
};

SliceCtx make_ctx(const Solution& sol, const CutoffSpec& cut, int k, bool want_zgrad,
                  Exec exec) {
  const GridSpec& g = sol.spec.grid;
  const double delta = sol.spec.base_flux().delta;
  SliceCtx ctx;
  ctx.u = sol.u.slice(k).data();
  ctx.eta = cut.eta.slice(k).data();
  ctx.sd = slice_derivatives(sol, k, want_zgrad, exec);
  time_derivative_slice(cut.eta, k, ctx.eta_t, exec);

  const std::size_t nn = g.space_size();
  ctx.w.resize(nn);
  ctx.gnorm.resize(nn);
  const auto& grad = ctx.sd.grad;
  kernels::for_each_node(g, exec, [&](std::size_t i) {
    double s = 0.0;
    for (int c = 0; c < 2 * g.n; ++c) s += grad[c][i] * grad[c][i];
    ctx.w[i] = delta + s;
    ctx.gnorm[i] = std::sqrt(s);
  });

  Field eta_k(g, FieldKind::slice);
  std::copy(cut.eta.slice(k).begin(), cut.eta.slice(k).end(), eta_k.values().begin());
  VectorField eg = horizontal_gradient(eta_k, exec);
  ctx.eta_gnorm.resize(nn);
  kernels::for_each_node(g, exec, [&](std::size_t i) {
    double s = 0.0;
    for (int c = 0; c < 2 * g.n; ++c) s += eg[c].values()[i] * eg[c].values()[i];
    ctx.eta_gnorm[i] = std::sqrt(s);
  });
  const Field ez = apply_z(eta_k, exec);
  ctx.eta_z.assign(ez.values().begin(), ez.values().end());

  if (want_zgrad) {
    ctx.zgrad_norm.resize(nn);
    kernels::for_each_node(g, exec, [&](std::size_t i) {
      double s = 0.0;
      for (int c = 0; c < 2 * g.n; ++c) s += ctx.sd.zgrad[c][i] * ctx.sd.zgrad[c][i];
      ctx.zgrad_norm[i] = std::sqrt(s);
    });
  }
  return ctx;
}

double finalize_C(double lhs, double rhs_total) {
  return rhs_total > 0.0 ? lhs / rhs_total : 0.0;
}

EstimateReport base_report(const char* name, const Solution& sol, const CutoffSpec& cut,
                           double beta) {
  EstimateReport r;
  r.name = name;
  r.p = sol.spec.base_flux().p;
  r.delta = sol.spec.base_flux().delta;
  r.beta = beta;
  r.grid = sol.spec.grid;
  r.cylinder = cut.cylinder;
  return r;
}

void require_estimate_range(double p, const char* name) {
  if (!(p >= 2.0 && p <= 4.0))
    throw ValidationError(std::string(name) + ": requires 2 <= p <= 4");
}

void require_beta(double beta, const char* name) {
  if (!(beta >= 0.0)) throw ValidationError(std::string(name) + ": beta must be >= 0");
}

void check_cutoff(const Solution& sol, const CutoffSpec& cut, const char* name) {
  const GridSpec& g = sol.spec.grid;
  if (cut.eta.kind() != FieldKind::spacetime || cut.eta.slice_size() != g.space_size() ||
      cut.eta.time_levels() != g.time_levels())
    throw ValidationError(std::string(name) + ": cutoff does not match the solution grid");
}

// Streamed spacetime integral: sum_k wt_k * sum_idx w_sp(idx) * term(ctx, idx).
template <class Term>
double accumulate(const Solution& sol, const CutoffSpec& cut, bool want_zgrad, Exec exec,
                  Term&& term) {
  const GridSpec& g = sol.spec.grid;
  double total = 0.0;
  for (int k = 0; k <= g.nt; ++k) {
    SliceCtx ctx = make_ctx(sol, cut, k, want_zgrad, exec);
    total += g.time_trapezoid_weight(k) *
             kernels::plane_sum(g, exec, [&](std::size_t i) {
               return kernels::node_weight(g, i) * term(ctx, i);
             });
  }
  return total;
}

}  // namespace

const std::vector<std::string> kInequalityNames = {
    "z_caccioppoli",     "horizontal_caccioppoli", "interpolation",
    "z_integrability",   "main_caccioppoli",       "time_derivative"};

CutoffSpec make_cutoff(const CylinderSpec& c, const GridSpec& g, Exec exec) {
  g.validate();
  if (c.center.n != g.n) throw ValidationError("make_cutoff: dimension mismatch");
  if (!(c.r > 0.0) || !(c.mu > 0.0)) throw ValidationError("make_cutoff: need r, mu > 0");
  const double slack = 1e-12 * (std::abs(g.t1 - g.t0) + 1.0);
  if (c.t_bottom() < g.t0 - slack || c.t0 > g.t1 + slack)
    throw ValidationError("make_cutoff: insufficient margin (time extent leaves the grid)");

  CutoffSpec cut;
  cut.cylinder = c;

  // Spatial profile once; the time profile multiplies it per slice.
  Field spatial(g, FieldKind::slice);
  const double* center = c.center.coords.data();
  double* sv = spatial.values().data();
  kernels::for_each_node(g, exec, [&](std::size_t idx) {
    double x[16];
    g.coords_at(idx, x);
    sv[idx] = cutoff_profile(gauge_distance_raw(g.n, x, center) / c.r);
  });
  const double margin_violation = kernels::plane_max(g, exec, [&](std::size_t idx) {
    return kernels::is_deep_interior(g, idx, 2) ? 0.0 : std::abs(sv[idx]);
  });
  if (margin_violation != 0.0)
    throw ValidationError("make_cutoff: insufficient margin (support touches the box faces)");

  cut.eta = Field(g, FieldKind::spacetime);
  for (int k = 0; k <= g.nt; ++k) {
    const double psi = cutoff_profile((c.t0 - g.out_time(k)) / (c.mu * c.r * c.r));
    double* ek = cut.eta.slice(k).data();
    kernels::for_each_node(g, exec, [&](std::size_t idx) { ek[idx] = psi * sv[idx]; });
  }

  // Discretely measured norms.
  std::vector<double> eta_t;
  for (int k = 0; k <= g.nt; ++k) {
    Field eta_k(g, FieldKind::slice);
    std::copy(cut.eta.slice(k).begin(), cut.eta.slice(k).end(), eta_k.values().begin());
    VectorField eg = horizontal_gradient(eta_k, exec);
    const Field ez = apply_z(eta_k, exec);
    time_derivative_slice(cut.eta, k, eta_t, exec);
    const double* ek = eta_k.values().data();
    const double* ezv = ez.values().data();
    const double g_sup = kernels::plane_max(g, exec, [&](std::size_t i) {
      double s = 0.0;
      for (int cmp = 0; cmp < 2 * g.n; ++cmp) s += eg[cmp].values()[i] * eg[cmp].values()[i];
      return std::sqrt(s);
    });
    const double z_sup = kernels::plane_max(g, exec, [&](std::size_t i) { return std::abs(ezv[i]); });
    const double dt_sup = kernels::plane_max(g, exec, [&](std::size_t i) { return std::abs(eta_t[i]); });
    const double eta_dt_sup = kernels::plane_max(g, exec, [&](std::size_t i) {
      return std::abs(ek[i] * eta_t[i]);
    });
    const double eta_z_sup = kernels::plane_max(g, exec, [&](std::size_t i) {
      return std::abs(ek[i] * ezv[i]);
    });
    cut.norms.grad = std::max(cut.norms.grad, g_sup);
    cut.norms.z = std::max(cut.norms.z, z_sup);
    cut.norms.dt = std::max(cut.norms.dt, dt_sup);
    cut.norms.eta_dt = std::max(cut.norms.eta_dt, eta_dt_sup);
    cut.norms.eta_z = std::max(cut.norms.eta_z, eta_z_sup);
  }

  double support = 0.0;
  for (int k = 0; k <= g.nt; ++k) {
    const double* ek = cut.eta.slice(k).data();
    support += g.time_trapezoid_weight(k) * kernels::plane_sum(g, exec, [&](std::size_t i) {
                 return ek[i] > 0.0 ? kernels::node_weight(g, i) : 0.0;
               });
  }
  cut.support_volume = support;
  return cut;
}

EstimateReport z_caccioppoli_report(const Solution& sol, const CutoffSpec& cut, double beta,
                                    Exec exec) {
  require_beta(beta, "z_caccioppoli_report");
  check_cutoff(sol, cut, "z_caccioppoli_report");
  EstimateReport r = base_report("z_caccioppoli", sol, cut, beta);
  const double q = 0.5 * (r.p - 2.0);

  const double lhs = accumulate(sol, cut, true, exec, [&](const SliceCtx& c, std::size_t i) {
    const double zu = std::abs(c.sd.zu[i]);
    return half_power(c.w[i], q) * powe(zu, beta) * c.zgrad_norm[i] * c.zgrad_norm[i] *
           powe(c.eta[i], 4.0 + beta);
  });
  const double rhs_grad =
      accumulate(sol, cut, false, exec, [&](const SliceCtx& c, std::size_t i) {
        const double zu = std::abs(c.sd.zu[i]);
        return half_power(c.w[i], q) * powe(zu, beta + 2.0) * c.eta_gnorm[i] * c.eta_gnorm[i] *
               powe(c.eta[i], 2.0 + beta);
      });
  const double rhs_time =
      accumulate(sol, cut, false, exec, [&](const SliceCtx& c, std::size_t i) {
        const double zu = std::abs(c.sd.zu[i]);
        return powe(zu, beta + 2.0) * std::abs(c.eta_t[i]) * powe(c.eta[i], 3.0 + beta);
      });

  r.lhs = lhs;
  r.rhs_terms = {{"grad_eta_term", rhs_grad}, {"time_eta_term", rhs_time}};
  r.empirical_C = finalize_C(lhs, r.rhs_total());
  if (!std::isfinite(lhs) || !std::isfinite(rhs_grad) || !std::isfinite(rhs_time))
    throw ValidationError("z_caccioppoli_report: non-finite integrand");
  return r;
}

EstimateReport horizontal_caccioppoli_report(const Solution& sol, const CutoffSpec& cut,
                                             double beta, Exec exec) {
  require_beta(beta, "horizontal_caccioppoli_report");
  check_cutoff(sol, cut, "horizontal_caccioppoli_report");
  EstimateReport r = base_report("horizontal_caccioppoli", sol, cut, beta);
  const GridSpec& g = sol.spec.grid;
  const double p = r.p;

  double sup_term = 0.0;
  double hess_term = 0.0;
  double rhs_grad = 0.0, rhs_time = 0.0, rhs_zu = 0.0;
  for (int k = 0; k <= g.nt; ++k) {
    SliceCtx c = make_ctx(sol, cut, k, false, exec);
    const double wt = g.time_trapezoid_weight(k);
    const double sup_k = kernels::plane_sum(g, exec, [&](std::size_t i) {
      return kernels::node_weight(g, i) * half_power(c.w[i], 0.5 * (beta + 2.0)) * c.eta[i] *
             c.eta[i];
    });
    sup_term = std::max(sup_term, sup_k);
    hess_term += wt * kernels::plane_sum(g, exec, [&](std::size_t i) {
      return kernels::node_weight(g, i) * half_power(c.w[i], 0.5 * (p - 2.0 + beta)) *
             c.sd.hess_norm2[i] * c.eta[i] * c.eta[i];
    });
    rhs_grad += wt * kernels::plane_sum(g, exec, [&](std::size_t i) {
      return kernels::node_weight(g, i) * half_power(c.w[i], 0.5 * (p + beta)) *
             (c.eta_gnorm[i] * c.eta_gnorm[i] + std::abs(c.eta_z[i]) * c.eta[i]);
    });
    rhs_time += wt * kernels::plane_sum(g, exec, [&](std::size_t i) {
      return kernels::node_weight(g, i) * half_power(c.w[i], 0.5 * (beta + 2.0)) *
             std::abs(c.eta_t[i]) * c.eta[i];
    });
    rhs_zu += wt * kernels::plane_sum(g, exec, [&](std::size_t i) {
      return kernels::node_weight(g, i) * half_power(c.w[i], 0.5 * (p - 2.0 + beta)) *
             c.sd.zu[i] * c.sd.zu[i] * c.eta[i] * c.eta[i];
    });
  }

  r.lhs = sup_term / (beta + 2.0) + hess_term;
  r.rhs_terms = {{"grad_eta_term", rhs_grad},
                 {"time_eta_term", rhs_time / (beta + 2.0)},
                 {"zu_term", std::pow(beta + 1.0, 4.0) * rhs_zu}};
  r.extras = {{"sup_term", sup_term / (beta + 2.0)}, {"hessian_term", hess_term}};
  r.empirical_C = finalize_C(r.lhs, r.rhs_total());
  if (!std::isfinite(r.lhs) || !std::isfinite(r.rhs_total()))
    throw ValidationError("horizontal_caccioppoli_report: non-finite integrand");
  return r;
}

namespace {

struct InterpolationParts {
  double L = 0.0, R = 0.0, M = 0.0, M_delta = 0.0, I1 = 0.0, I2 = 0.0;
};

InterpolationParts interpolation_parts(const Solution& sol, const CutoffSpec& cut, double beta,
                                       Exec exec) {
  const GridSpec& g = sol.spec.grid;
  const double p = sol.spec.base_flux().p;
  InterpolationParts parts;
  for (int k = 0; k <= g.nt; ++k) {
    SliceCtx c = make_ctx(sol, cut, k, true, exec);
    const double wt = g.time_trapezoid_weight(k);
    parts.L += wt * kernels::plane_sum(g, exec, [&](std::size_t i) {
      return kernels::node_weight(g, i) * powe(std::abs(c.sd.zu[i]), p + beta) *
             powe(c.eta[i], p + beta);
    });
    parts.R += wt * kernels::plane_sum(g, exec, [&](std::size_t i) {
      if (c.eta[i] <= 0.0) return 0.0;
      return kernels::node_weight(g, i) * half_power(c.w[i], 0.5 * (p + beta));
    });
    parts.M += wt * kernels::plane_sum(g, exec, [&](std::size_t i) {
      const double zu = std::abs(c.sd.zu[i]);
      return kernels::node_weight(g, i) * powe(c.gnorm[i], p - 2.0) * powe(zu, beta) *
             c.zgrad_norm[i] * c.zgrad_norm[i] * powe(c.eta[i], 4.0 + beta);
    });
    parts.M_delta += wt * kernels::plane_sum(g, exec, [&](std::size_t i) {
      const double zu = std::abs(c.sd.zu[i]);
      return kernels::node_weight(g, i) * half_power(c.w[i], 0.5 * (p - 2.0)) * powe(zu, beta) *
             c.zgrad_norm[i] * c.zgrad_norm[i] * powe(c.eta[i], 4.0 + beta);
    });
    parts.I1 += wt * kernels::plane_sum(g, exec, [&](std::size_t i) {
      const double zu = std::abs(c.sd.zu[i]);
      return kernels::node_weight(g, i) * c.gnorm[i] * powe(zu, p - 2.0 + beta) *
             c.zgrad_norm[i] * powe(c.eta[i], p + beta);
    });
    parts.I2 += wt * kernels::plane_sum(g, exec, [&](std::size_t i) {
      const double zu = std::abs(c.sd.zu[i]);
      return kernels::node_weight(g, i) * c.gnorm[i] * powe(zu, p - 1.0 + beta) *
             c.eta_gnorm[i] * powe(c.eta[i], p - 1.0 + beta);
    });
  }
  parts.I1 *= 2.0 * (p + beta);
  parts.I2 *= 2.0 * (p + beta);
  return parts;
}

}  // namespace

EstimateReport interpolation_report(const Solution& sol, const CutoffSpec& cut, double beta,
                                    Exec exec) {
  require_beta(beta, "interpolation_report");
  require_estimate_range(sol.spec.base_flux().p, "interpolation_report");
  check_cutoff(sol, cut, "interpolation_report");
  EstimateReport r = base_report("interpolation", sol, cut, beta);
  const double p = r.p;

  const InterpolationParts parts = interpolation_parts(sol, cut, beta, exec);
  r.lhs = parts.L;
  r.rhs_terms = {{"grad_eta_term", (p + beta) * cut.norms.grad * parts.R},
                 {"z_gradient_term", (p + beta) * parts.M_delta}};
  r.extras = {{"L", parts.L}, {"R", parts.R},   {"M", parts.M},
              {"M_delta", parts.M_delta}, {"I1", parts.I1}, {"I2", parts.I2}};
  r.poly_factor = p + beta;
  r.empirical_C = finalize_C(r.lhs, r.rhs_total());
  if (!std::isfinite(r.lhs) || !std::isfinite(r.rhs_total()))
    throw ValidationError("interpolation_report: non-finite integrand");
  return r;
}

EstimateReport z_integrability_report(const Solution& sol, const CutoffSpec& cut, double beta,
                                      Exec exec) {
  require_beta(beta, "z_integrability_report");
  require_estimate_range(sol.spec.base_flux().p, "z_integrability_report");
  check_cutoff(sol, cut, "z_integrability_report");
  EstimateReport r = base_report("z_integrability", sol, cut, beta);
  const double p = r.p;

  const InterpolationParts parts = interpolation_parts(sol, cut, beta, exec);
  r.lhs = powe(parts.L, 1.0 / (p + beta));
  const double rhs_grad = (p + beta) * cut.norms.grad * powe(parts.R, 1.0 / (p + beta));
  const double rhs_time = (p + beta) * std::sqrt(cut.norms.eta_dt) *
                          powe(cut.support_volume, (p - 2.0) / (2.0 * (p + beta))) *
                          powe(parts.R, (4.0 - p) / (2.0 * (p + beta)));
  r.rhs_terms = {{"grad_eta_term", rhs_grad}, {"time_support_term", rhs_time}};
  r.extras = {{"L", parts.L}, {"R", parts.R}, {"support_volume", cut.support_volume}};
  r.poly_factor = p + beta;
  r.empirical_C = finalize_C(r.lhs, r.rhs_total());
  if (!std::isfinite(r.lhs) || !std::isfinite(r.rhs_total()))
    throw ValidationError("z_integrability_report: non-finite integrand");
  return r;
}

EstimateReport main_caccioppoli_report(const Solution& sol, const CutoffSpec& cut, double beta,
                                       Exec exec) {
  require_beta(beta, "main_caccioppoli_report");
  require_estimate_range(sol.spec.base_flux().p, "main_caccioppoli_report");
  check_cutoff(sol, cut, "main_caccioppoli_report");
  EstimateReport r = base_report("main_caccioppoli", sol, cut, beta);
  const GridSpec& g = sol.spec.grid;
  const double p = r.p;

  double sup_term = 0.0, hess_term = 0.0, R = 0.0;
  for (int k = 0; k <= g.nt; ++k) {
    SliceCtx c = make_ctx(sol, cut, k, false, exec);
    const double wt = g.time_trapezoid_weight(k);
    const double sup_k = kernels::plane_sum(g, exec, [&](std::size_t i) {
      return kernels::node_weight(g, i) * half_power(c.w[i], 0.5 * (beta + 2.0)) * c.eta[i] *
             c.eta[i];
    });
    sup_term = std::max(sup_term, sup_k);
    hess_term += wt * kernels::plane_sum(g, exec, [&](std::size_t i) {
      return kernels::node_weight(g, i) * half_power(c.w[i], 0.5 * (p - 2.0 + beta)) *
             c.sd.hess_norm2[i] * c.eta[i] * c.eta[i];
    });
    R += wt * kernels::plane_sum(g, exec, [&](std::size_t i) {
      if (c.eta[i] <= 0.0) return 0.0;
      return kernels::node_weight(g, i) * half_power(c.w[i], 0.5 * (p + beta));
    });
  }

  const double pf = std::pow(p + beta, 7.0);
  const double rhs_grad = pf * (cut.norms.grad * cut.norms.grad + cut.norms.eta_z) * R;
  const double rhs_time = pf * cut.norms.eta_dt *
                          powe(cut.support_volume, (p - 2.0) / (p + beta)) *
                          powe(R, (beta + 2.0) / (p + beta));
  r.lhs = sup_term + hess_term;
  r.rhs_terms = {{"grad_eta_term", rhs_grad}, {"time_support_term", rhs_time}};
  r.extras = {{"sup_term", sup_term}, {"hessian_term", hess_term}, {"R", R}};
  r.poly_factor = pf;
  r.empirical_C = finalize_C(r.lhs, r.rhs_total());
  if (!std::isfinite(r.lhs) || !std::isfinite(r.rhs_total()))
    throw ValidationError("main_caccioppoli_report: non-finite integrand");
  return r;
}

EstimateReport time_derivative_report(const Solution& sol, const CutoffSpec& cut, double beta,
                                      Exec exec) {
  require_beta(beta, "time_derivative_report");
  check_cutoff(sol, cut, "time_derivative_report");
  EstimateReport r = base_report("time_derivative", sol, cut, beta);
  const GridSpec& g = sol.spec.grid;
  const double p = r.p;

  double lhs = 0.0;
  double m_sup = 0.0;
  for (int k = 0; k <= g.nt; ++k) {
    SliceCtx c = make_ctx(sol, cut, k, false, exec);
    lhs += g.time_trapezoid_weight(k) * kernels::plane_sum(g, exec, [&](std::size_t i) {
      return kernels::node_weight(g, i) * powe(std::abs(c.sd.ut[i]), beta + 2.0) *
             powe(c.eta[i], beta + 2.0);
    });
    const double mk = kernels::plane_max(g, exec, [&](std::size_t i) {
      return c.eta[i] > 0.0 ? std::sqrt(c.w[i]) : 0.0;
    });
    m_sup = std::max(m_sup, mk);
  }

  const double inner = powe(m_sup, 2.0 * p - 2.0) * cut.norms.grad * cut.norms.grad +
                       powe(m_sup, p) * cut.norms.eta_dt;
  const double rhs = powe(inner, 0.5 * (beta + 2.0)) * cut.support_volume;
  r.lhs = lhs;
  r.rhs_terms = {{"envelope_term", rhs}};
  r.extras = {{"M", m_sup},
              {"grad_eta_norm", cut.norms.grad},
              {"eta_dt_norm", cut.norms.eta_dt},
              {"support_volume", cut.support_volume}};
  r.empirical_C = finalize_C(lhs, r.rhs_total());
  if (!std::isfinite(lhs) || !std::isfinite(rhs))
    throw ValidationError("time_derivative_report: non-finite integrand");
  return r;
}

EstimateReport run_report(const std::string& name, const Solution& sol, const CutoffSpec& cut,
                          double beta, Exec exec) {
  if (name == "z_caccioppoli") return z_caccioppoli_report(sol, cut, beta, exec);
  if (name == "horizontal_caccioppoli")
    return horizontal_caccioppoli_report(sol, cut, beta, exec);
  if (name == "interpolation") return interpolation_report(sol, cut, beta, exec);
  if (name == "z_integrability") return z_integrability_report(sol, cut, beta, exec);
  if (name == "main_caccioppoli") return main_caccioppoli_report(sol, cut, beta, exec);
  if (name == "time_derivative") return time_derivative_report(sol, cut, beta, exec);
  throw ValidationError("unknown inequality id: " + name);
}

std::vector<std::pair<std::string, double>> report_exponents(const std::string& name, double p,
                                                             double beta) {
  if (name == "z_caccioppoli")
    return {{"lhs_weight", 0.5 * (p - 2.0)}, {"lhs_zu", beta},       {"lhs_eta", 4.0 + beta},
            {"rhs1_weight", 0.5 * (p - 2.0)}, {"rhs1_zu", beta + 2.0}, {"rhs1_eta", 2.0 + beta},
            {"rhs2_zu", beta + 2.0},          {"rhs2_eta", 3.0 + beta}};
  if (name == "horizontal_caccioppoli")
    return {{"sup_weight", 0.5 * (beta + 2.0)},
            {"hess_weight", 0.5 * (p - 2.0 + beta)},
            {"rhs1_weight", 0.5 * (p + beta)},
            {"rhs2_weight", 0.5 * (beta + 2.0)},
            {"rhs3_weight", 0.5 * (p - 2.0 + beta)},
            {"rhs3_poly", 4.0}};
  if (name == "interpolation")
    return {{"lhs_zu", p + beta},
            {"lhs_eta", p + beta},
            {"R_weight", 0.5 * (p + beta)},
            {"M_eta", 4.0 + beta},
            {"I1_R_exponent", (4.0 - p) / (2.0 * (p + beta))},
            {"I1_L_exponent", (2.0 * p - 4.0 + beta) / (2.0 * (p + beta))},
            {"I2_R_exponent", 1.0 / (p + beta)},
            {"I2_L_exponent", (p - 1.0 + beta) / (p + beta)}};
  if (name == "z_integrability")
    return {{"lhs_root", 1.0 / (p + beta)},
            {"rhs1_R_exponent", 1.0 / (p + beta)},
            {"rhs2_support_exponent", (p - 2.0) / (2.0 * (p + beta))},
            {"rhs2_R_exponent", (4.0 - p) / (2.0 * (p + beta))}};
  if (name == "main_caccioppoli")
    return {{"sup_weight", 0.5 * (beta + 2.0)},
            {"hess_weight", 0.5 * (p - 2.0 + beta)},
            {"R_weight", 0.5 * (p + beta)},
            {"poly_power", 7.0},
            {"rhs2_support_exponent", (p - 2.0) / (p + beta)},
            {"rhs2_R_exponent", (beta + 2.0) / (p + beta)}};
  if (name == "time_derivative")
    return {{"lhs_ut", beta + 2.0},
            {"lhs_eta", beta + 2.0},
            {"M_grad_power", 2.0 * p - 2.0},
            {"M_time_power", p},
            {"envelope_power", 0.5 * (beta + 2.0)}};
  throw ValidationError("unknown inequality id: " + name);
}

namespace {

void validate_test_function(const GridSpec& g, const Field& phi, Exec exec) {
  if (phi.kind() != FieldKind::spacetime || phi.slice_size() != g.space_size() ||
      phi.time_levels() != g.time_levels())
    throw ValidationError("residual: phi extent mismatch");
  if (g.nt < 4) throw ValidationError("residual: need nt >= 4");
  for (int k = 0; k <= g.nt; ++k) {
    const double* pv = phi.slice(k).data();
    const bool end = (k <= 1 || k >= g.nt - 1);
    const double bad = kernels::plane_max(g, exec, [&](std::size_t idx) {
      if (end || !kernels::is_deep_interior(g, idx, 2)) return std::abs(pv[idx]);
      return 0.0;
    });
    if (bad != 0.0)
      throw ValidationError("residual: phi must vanish near the parabolic boundary");
  }
}

}  // namespace

double differentiated_equation_residual(const Solution& sol, const Field& phi, int l,
                                        Exec exec) {
  const GridSpec& g = sol.spec.grid;
  if (l < 0 || l >= 2 * g.n)
    throw ValidationError("differentiated_equation_residual: index out of range");
  validate_test_function(g, phi, exec);
  const FluxModel& m = sol.spec.base_flux();
  const int nh = 2 * g.n;
  const double sl = l < g.n ? 1.0 : -1.0;
  const int partner = l < g.n ? l + g.n : l - g.n;

  std::vector<double> dtphi, di(g.space_size()), dz(g.space_size());
  double total = 0.0;
  for (int k = 0; k <= g.nt; ++k) {
    SliceDerivatives sd = slice_derivatives(sol, k, false, exec);
    time_derivative_slice(phi, k, dtphi, exec);
    // X_l X_j u for all j
    Field gl(g, FieldKind::slice);
    std::vector<std::vector<double>> xlxj(nh);
    for (int j = 0; j < nh; ++j) {
      std::copy(sd.grad[j].begin(), sd.grad[j].end(), gl.values().begin());
      const Field d = apply_x(l, gl, exec);
      xlxj[j].assign(d.values().begin(), d.values().end());
    }
    const double* pk = phi.slice(k).data();
    kernels::axis_derivative(g, pk, dz.data(), g.z_axis(), exec);
    // X_i phi
    std::vector<std::vector<double>> xphi(nh, std::vector<double>(g.space_size()));
    for (int i = 0; i < nh; ++i) {
      const int deriv_axis = i;
      const int coef_axis = i < g.n ? g.n + i : i - g.n;
      const double sign = i < g.n ? -1.0 : 1.0;
      kernels::axis_derivative(g, pk, di.data(), deriv_axis, exec);
      kernels::frame_combine(g, di.data(), dz.data(), coef_axis, sign, xphi[i].data(), exec);
    }
    const double wt = g.time_trapezoid_weight(k);
    total += wt * kernels::plane_sum(g, exec, [&](std::size_t idx) {
      double x[16], xi[16];
      g.coords_at(idx, x);
      for (int c = 0; c < nh; ++c) xi[c] = sd.grad[c][idx];
      const std::vector<double> jac = flux_jacobian(m, x, xi);
      const std::vector<double> a = eval_flux(m, x, xi);
      double diffuse = 0.0;
      for (int i = 0; i < nh; ++i)
        for (int j = 0; j < nh; ++j) diffuse += jac[i * nh + j] * xlxj[j][idx] * xphi[i][idx];
      const double commut = sl * a[partner] * dz[idx];
      return kernels::node_weight(g, idx) *
             (sd.grad[l][idx] * dtphi[idx] - diffuse - commut);
    });
  }
  return std::abs(total);
}

double z_equation_residual(const Solution& sol, const Field& phi, Exec exec) {
  const GridSpec& g = sol.spec.grid;
  validate_test_function(g, phi, exec);
  const FluxModel& m = sol.spec.base_flux();
  const int nh = 2 * g.n;

  std::vector<double> dtphi, di(g.space_size()), dz(g.space_size());
  double total = 0.0;
  for (int k = 0; k <= g.nt; ++k) {
    SliceDerivatives sd = slice_derivatives(sol, k, true, exec);
    time_derivative_slice(phi, k, dtphi, exec);
    const double* pk = phi.slice(k).data();
    kernels::axis_derivative(g, pk, dz.data(), g.z_axis(), exec);
    std::vector<std::vector<double>> xphi(nh, std::vector<double>(g.space_size()));
    for (int i = 0; i < nh; ++i) {
      const int coef_axis = i < g.n ? g.n + i : i - g.n;
      const double sign = i < g.n ? -1.0 : 1.0;
      kernels::axis_derivative(g, pk, di.data(), i, exec);
      kernels::frame_combine(g, di.data(), dz.data(), coef_axis, sign, xphi[i].data(), exec);
    }
    const double wt = g.time_trapezoid_weight(k);
    total += wt * kernels::plane_sum(g, exec, [&](std::size_t idx) {
      double x[16], xi[16];
      g.coords_at(idx, x);
      for (int c = 0; c < nh; ++c) xi[c] = sd.grad[c][idx];
      const std::vector<double> jac = flux_jacobian(m, x, xi);
      double diffuse = 0.0;
      for (int i = 0; i < nh; ++i)
        for (int j = 0; j < nh; ++j)
          diffuse += jac[i * nh + j] * sd.zgrad[j][idx] * xphi[i][idx];
      return kernels::node_weight(g, idx) * (sd.zu[idx] * dtphi[idx] - diffuse);
    });
  }
  return std::abs(total);
}

std::string report_to_jsonl(const EstimateReport& r) {
  JsonLine grid;
  grid.field("n", r.grid.n)
      .array("m", r.grid.m.begin(), r.grid.m.end())
      .array("box_lo", r.grid.box_lo.begin(), r.grid.box_lo.end())
      .array("box_hi", r.grid.box_hi.begin(), r.grid.box_hi.end())
      .field("t0", r.grid.t0)
      .field("t1", r.grid.t1)
      .field("nt", r.grid.nt);
  JsonLine cyl;
  cyl.array("center", r.cylinder.center.coords.begin(), r.cylinder.center.coords.end())
      .field("t0", r.cylinder.t0)
      .field("r", r.cylinder.r)
      .field("mu", r.cylinder.mu);
  JsonLine rhs;
  for (const auto& [k, v] : r.rhs_terms) rhs.field(k, v);
  JsonLine extras;
  for (const auto& [k, v] : r.extras) extras.field(k, v);

  JsonLine line;
  line.field("schema", "subpflow/1")
      .field("record", "estimate")
      .field("name", r.name)
      .field("p", r.p)
      .field("delta", r.delta)
      .field("beta", r.beta)
      .field("lhs", r.lhs)
      .raw("rhs_terms", rhs.str())
      .field("empirical_C", r.empirical_C)
      .field("poly_factor", r.poly_factor)
      .raw("extras", extras.str())
      .raw("grid", grid.str())
      .raw("cylinder", cyl.str());
  return line.str();
}

}  // namespace subpflow
