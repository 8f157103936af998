#include "subpflow/calculus.hpp"

#include <cmath>

namespace subpflow {

namespace {

void check_slice(const Field& f, const char* op) {
  if (f.kind() != FieldKind::slice)
    throw ValidationError(std::string(op) + ": expected a slice field");
}

// Frame parameters of X_i: derivative axis, coefficient axis and sign of the
// (x_c/2) D_z term.
struct FrameTerm {
  int deriv_axis;
  int coef_axis;
  double sign;
};

FrameTerm frame_term(const GridSpec& g, int i) {
  if (i < 0 || i >= 2 * g.n) throw ValidationError("apply_x: index out of range");
  if (i < g.n) return {i, g.n + i, -1.0};
  return {i, i - g.n, +1.0};
}

}  // namespace

Field apply_x(int i, const Field& f, Exec exec) {
  check_slice(f, "apply_x");
  const GridSpec& g = f.grid();
  const FrameTerm ft = frame_term(g, i);
  Field di(g, FieldKind::slice);
  Field dz(g, FieldKind::slice);
  kernels::axis_derivative(g, f.values().data(), di.values().data(), ft.deriv_axis, exec);
  kernels::axis_derivative(g, f.values().data(), dz.values().data(), g.z_axis(), exec);
  Field out(g, FieldKind::slice);
  kernels::frame_combine(g, di.values().data(), dz.values().data(), ft.coef_axis, ft.sign,
                         out.values().data(), exec);
  return out;
}

Field apply_z(const Field& f, Exec exec) {
  check_slice(f, "apply_z");
  Field out(f.grid(), FieldKind::slice);
  kernels::axis_derivative(f.grid(), f.values().data(), out.values().data(), f.grid().z_axis(),
                           exec);
  return out;
}

VectorField horizontal_gradient(const Field& f, Exec exec) {
  check_slice(f, "horizontal_gradient");
  const GridSpec& g = f.grid();
  Field dz = apply_z(f, exec);
  VectorField out;
  out.components.reserve(2 * g.n);
  Field di(g, FieldKind::slice);
  for (int i = 0; i < 2 * g.n; ++i) {
    const FrameTerm ft = frame_term(g, i);
    kernels::axis_derivative(g, f.values().data(), di.values().data(), ft.deriv_axis, exec);
    Field comp(g, FieldKind::slice);
    kernels::frame_combine(g, di.values().data(), dz.values().data(), ft.coef_axis, ft.sign,
                           comp.values().data(), exec);
    out.components.push_back(std::move(comp));
  }
  return out;
}

VectorField epsilon_gradient(const Field& f, double eps, Exec exec) {
  if (!(eps >= 0.0)) throw ValidationError("epsilon_gradient: eps must be >= 0");
  VectorField out = horizontal_gradient(f, exec);
  Field vz = apply_z(f, exec);
  kernels::for_each_node(f.grid(), exec, [&, eps](std::size_t idx) {
    vz.values()[idx] *= eps;
  });
  out.components.push_back(std::move(vz));
  return out;
}

Field horizontal_divergence(const VectorField& F, Exec exec) {
  if (F.size() == 0) throw ValidationError("horizontal_divergence: empty field");
  const GridSpec& g = F[0].grid();
  if (F.size() != 2 * g.n)
    throw ValidationError("horizontal_divergence: expected 2n components");
  Field out(g, FieldKind::slice);
  Field tmp(g, FieldKind::slice);
  Field zflux(g, FieldKind::slice);
  for (int i = 0; i < 2 * g.n; ++i) {
    check_slice(F[i], "horizontal_divergence");
    const FrameTerm ft = frame_term(g, i);
    kernels::axis_derivative(g, F[i].values().data(), tmp.values().data(), ft.deriv_axis, exec);
    kernels::add_into(g, tmp.values().data(), out.values().data(), exec);
    kernels::coeff_axpy(g, F[i].values().data(), ft.coef_axis, ft.sign, zflux.values().data(),
                        exec);
  }
  kernels::axis_derivative(g, zflux.values().data(), tmp.values().data(), g.z_axis(), exec);
  kernels::add_into(g, tmp.values().data(), out.values().data(), exec);
  return out;
}

MatrixField second_horizontal(const Field& f, Exec exec) {
  const GridSpec& g = f.grid();
  MatrixField out;
  out.n = g.n;
  out.entries.reserve(4 * g.n * g.n);
  VectorField grad = horizontal_gradient(f, exec);
  for (int i = 0; i < 2 * g.n; ++i)
    for (int j = 0; j < 2 * g.n; ++j) out.entries.push_back(apply_x(i, grad[j], exec));
  return out;
}

Field second_horizontal_norm2(const Field& f, Exec exec) {
  const GridSpec& g = f.grid();
  Field out(g, FieldKind::slice);
  VectorField grad = horizontal_gradient(f, exec);
  for (int j = 0; j < 2 * g.n; ++j) {
    VectorField col = horizontal_gradient(grad[j], exec);
    for (int i = 0; i < 2 * g.n; ++i) {
      const double* e = col[i].values().data();
      kernels::for_each_node(g, exec, [&](std::size_t idx) {
        out.values()[idx] += e[idx] * e[idx];
      });
    }
  }
  return out;
}

double commutator_defect(const Field& f, Exec exec) {
  const GridSpec& g = f.grid();
  Field zf = apply_z(f, exec);
  double worst = 0.0;
  for (int i = 0; i < g.n; ++i) {
    Field xi = apply_x(i, f, exec);
    Field xni = apply_x(g.n + i, f, exec);
    Field a = apply_x(i, xni, exec);
    Field b = apply_x(g.n + i, xi, exec);
    const double* pa = a.values().data();
    const double* pb = b.values().data();
    const double* pz = zf.values().data();
    const double d = kernels::plane_max(g, exec, [&](std::size_t idx) {
      if (!kernels::is_deep_interior(g, idx, 2)) return 0.0;
      return std::abs(pa[idx] - pb[idx] - pz[idx]);
    });
    worst = std::max(worst, d);
  }
  return worst;
}

double integrate_slice(const GridSpec& g, std::span<const double> values,
                       std::span<const double> weight, Exec exec) {
  if (values.size() != g.space_size())
    throw ValidationError("integrate_slice: extent mismatch");
  if (!weight.empty() && weight.size() != values.size())
    throw ValidationError("integrate_slice: weight extent mismatch");
  const double* v = values.data();
  const double* w = weight.empty() ? nullptr : weight.data();
  return kernels::plane_sum(g, exec, [&](std::size_t idx) {
    const double base = kernels::node_weight(g, idx) * v[idx];
    return w ? base * w[idx] : base;
  });
}

double integrate_spacetime(const Field& f, const Field* weight, Exec exec) {
  if (f.kind() != FieldKind::spacetime)
    throw ValidationError("integrate_spacetime: expected a spacetime field");
  const GridSpec& g = f.grid();
  if (weight) {
    if (weight->slice_size() != f.slice_size())
      throw ValidationError("integrate_spacetime: weight extent mismatch");
    if (weight->kind() == FieldKind::spacetime && weight->time_levels() != f.time_levels())
      throw ValidationError("integrate_spacetime: weight time extent mismatch");
  }
  double total = 0.0;
  for (int k = 0; k <= g.nt; ++k) {
    std::span<const double> w;
    if (weight) w = weight->kind() == FieldKind::slice ? weight->slice(0) : weight->slice(k);
    total += g.time_trapezoid_weight(k) * integrate_slice(g, f.slice(k), w, exec);
  }
  return total;
}

Field cylinder_space_mask(const GridSpec& g, const CylinderSpec& c, Exec exec) {
  if (c.center.n != g.n) throw ValidationError("cylinder_space_mask: dimension mismatch");
  if (g.dims() > 16) throw ValidationError("cylinder_space_mask: n too large");
  Field mask(g, FieldKind::slice);
  const double* center = c.center.coords.data();
  double* mv = mask.values().data();
  kernels::for_each_node(g, exec, [&](std::size_t idx) {
    double x[16];
    g.coords_at(idx, x);
    mv[idx] = gauge_distance_raw(g.n, x, center) < c.r ? 1.0 : 0.0;
  });
  return mask;
}

double sup_over_cylinder(const Field& f, const CylinderSpec& c, Exec exec) {
  if (f.kind() != FieldKind::spacetime)
    throw ValidationError("sup_over_cylinder: expected a spacetime field");
  const GridSpec& g = f.grid();
  Field mask = cylinder_space_mask(g, c, exec);
  const double* mv = mask.values().data();
  bool any_node = false;
  for (std::size_t idx = 0; idx < g.space_size(); ++idx)
    if (mv[idx] > 0.0) { any_node = true; break; }
  bool any = false;
  double best = 0.0;
  for (int k = 0; k <= g.nt; ++k) {
    const double t = g.out_time(k);
    if (t > c.t0 || t <= c.t_bottom()) continue;
    if (!any_node) continue;
    const double* v = f.slice(k).data();
    const double m = kernels::plane_max(g, exec, [&](std::size_t idx) {
      return mv[idx] > 0.0 ? std::abs(v[idx]) : -1.0;
    });
    if (m >= 0.0) {
      best = any ? std::max(best, m) : m;
      any = true;
    }
  }
  if (!any) throw ValidationError("sup_over_cylinder: cylinder does not intersect the grid");
  return best;
}

double sbp_defect(const Field& f, const Field& g_field, int i, Exec exec) {
  check_slice(f, "sbp_defect");
  check_slice(g_field, "sbp_defect");
  const GridSpec& g = f.grid();
  const double* pf = f.values().data();
  const double* pg = g_field.values().data();
  // Both fields must vanish on the two outermost layers of every face.
  const double support_violation = kernels::plane_max(g, exec, [&](std::size_t idx) {
    if (kernels::is_deep_interior(g, idx, 2)) return 0.0;
    return std::abs(pf[idx]) + std::abs(pg[idx]);
  });
  if (support_violation != 0.0)
    throw ValidationError("sbp_defect: fields must vanish on two layers at every face");
  Field xf = apply_x(i, f, exec);
  Field xg = apply_x(i, g_field, exec);
  const double* pxf = xf.values().data();
  const double* pxg = xg.values().data();
  const double s = kernels::plane_sum(g, exec, [&](std::size_t idx) {
    return pxf[idx] * pg[idx] + pf[idx] * pxg[idx];
  });
  return std::abs(s) * g.cell_volume();
}

Field sample_slice(const GridSpec& g, const std::function<double(const double*)>& fn) {
  Field out(g, FieldKind::slice);
  std::vector<double> x(g.dims());
  for (std::size_t idx = 0; idx < g.space_size(); ++idx) {
    g.coords_at(idx, x.data());
    out.values()[idx] = fn(x.data());
  }
  return out;
}

Field sample_spacetime(const GridSpec& g,
                       const std::function<double(const double*, double)>& fn) {
  Field out(g, FieldKind::spacetime);
  std::vector<double> x(g.dims());
  for (int k = 0; k <= g.nt; ++k) {
    const double t = g.out_time(k);
    double* v = out.slice(k).data();
    for (std::size_t idx = 0; idx < g.space_size(); ++idx) {
      g.coords_at(idx, x.data());
      v[idx] = fn(x.data(), t);
    }
  }
  return out;
}

}  // namespace subpflow
