#pragma once

#include <cstddef>
#include <vector>

#include "subpflow/grid.hpp"

namespace subpflow::kernels {

/// dst = d(src)/dx_axis: second-order centered differences in the interior,
/// one-sided second-order stencils on the two boundary layers of `axis`.
void axis_derivative(const GridSpec& g, const double* src, double* dst, int axis, Exec exec);

/// dst = di + sign * 0.5 * x_{coef_axis} * dz  (the frame combination step of
/// X_i f = D_i f -/+ (x_{n+-i}/2) D_z f).
void frame_combine(const GridSpec& g, const double* di, const double* dz, int coef_axis,
                   double sign, double* dst, Exec exec);

/// acc += sign * 0.5 * x_{coef_axis} * f. Used to assemble the z-flux of the
/// fused divergence (the frame coefficients are constant along z, so they
/// commute with the z-derivative exactly).
void coeff_axpy(const GridSpec& g, const double* f, int coef_axis, double sign, double* acc,
                Exec exec);

void add_into(const GridSpec& g, const double* src, double* acc, Exec exec);

/// Iterates fn(flat_index) over all spatial nodes, parallelized over planes
/// of the last axis. fn must only write to locations owned by its node.
template <class F>
void for_each_node(const GridSpec& g, Exec exec, F&& fn) {
  const int mz = g.m[g.dims() - 1];
  const std::size_t plane = g.space_size() / static_cast<std::size_t>(mz);
  [[maybe_unused]] const bool par = (exec == Exec::parallel);
#pragma omp parallel for schedule(static) if (par)
  for (int pz = 0; pz < mz; ++pz) {
    const std::size_t base = static_cast<std::size_t>(pz) * plane;
    for (std::size_t r = 0; r < plane; ++r) fn(base + r);
  }
}

/// Deterministic sum of term(flat_index) over all spatial nodes. Partial sums
/// are accumulated per plane of the last axis and combined in plane order, so
/// serial and parallel execution produce bit-identical results.
template <class F>
double plane_sum(const GridSpec& g, Exec exec, F&& term) {
  const int mz = g.m[g.dims() - 1];
  const std::size_t plane = g.space_size() / static_cast<std::size_t>(mz);
  std::vector<double> partial(mz, 0.0);
  [[maybe_unused]] const bool par = (exec == Exec::parallel);
#pragma omp parallel for schedule(static) if (par)
  for (int pz = 0; pz < mz; ++pz) {
    const std::size_t base = static_cast<std::size_t>(pz) * plane;
    double s = 0.0;
    for (std::size_t r = 0; r < plane; ++r) s += term(base + r);
    partial[pz] = s;
  }
  double total = 0.0;
  for (int pz = 0; pz < mz; ++pz) total += partial[pz];
  return total;
}

/// Max of term(flat_index) over all spatial nodes (plane-partial layout kept
/// for symmetry with plane_sum; max is order-independent anyway).
template <class F>
double plane_max(const GridSpec& g, Exec exec, F&& term) {
  const int mz = g.m[g.dims() - 1];
  const std::size_t plane = g.space_size() / static_cast<std::size_t>(mz);
  std::vector<double> partial(mz, 0.0);
  [[maybe_unused]] const bool par = (exec == Exec::parallel);
#pragma omp parallel for schedule(static) if (par)
  for (int pz = 0; pz < mz; ++pz) {
    const std::size_t base = static_cast<std::size_t>(pz) * plane;
    double v = term(base);
    for (std::size_t r = 1; r < plane; ++r) v = std::max(v, term(base + r));
    partial[pz] = v;
  }
  double total = partial[0];
  for (int pz = 1; pz < mz; ++pz) total = std::max(total, partial[pz]);
  return total;
}

/// Trapezoid quadrature weight of a spatial node (product over axes).
double node_weight(const GridSpec& g, std::size_t flat);

/// True when the node touches no box face.
bool is_interior(const GridSpec& g, std::size_t flat);

/// True when the node is at least `layers` nodes away from every box face.
bool is_deep_interior(const GridSpec& g, std::size_t flat, int layers);

}  // namespace subpflow::kernels
