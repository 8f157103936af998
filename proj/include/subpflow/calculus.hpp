#pragma once

#include <functional>

#include "subpflow/kernels.hpp"

namespace subpflow {

/// 2n x 2n matrix of slice fields (entries X_i X_j f).
struct MatrixField {
  int n = 1;
  std::vector<Field> entries;  // row-major, (2n)^2 slices

  Field& at(int i, int j) { return entries[i * 2 * n + j]; }
  const Field& at(int i, int j) const { return entries[i * 2 * n + j]; }
};

/// X_i f for the horizontal frame, i in [0, 2n):
///   X_i     = D_i - (x_{n+i}/2) D_z      for i < n,
///   X_{n+i} = D_{n+i} + (x_i/2) D_z      for the conjugate range.
Field apply_x(int i, const Field& f, Exec exec = Exec::parallel);

/// Z f = D_z f.
Field apply_z(const Field& f, Exec exec = Exec::parallel);

/// (X_1 f, ..., X_2n f).
VectorField horizontal_gradient(const Field& f, Exec exec = Exec::parallel);

/// (X_1 f, ..., X_2n f, eps * Z f); the squared eps-norm of the result is
/// sum_i (X_i f)^2 + eps^2 (Z f)^2.
VectorField epsilon_gradient(const Field& f, double eps, Exec exec = Exec::parallel);

/// sum_i X_i F_i. The frame is divergence-free, so this uses the same
/// centered stencils as apply_x (coefficients are constant along z and
/// commute with D_z exactly).
Field horizontal_divergence(const VectorField& F, Exec exec = Exec::parallel);

/// Entries X_i X_j f by operator composition.
MatrixField second_horizontal(const Field& f, Exec exec = Exec::parallel);

/// Pointwise squared Frobenius norm |grad_0^2 f|^2 as a slice.
Field second_horizontal_norm2(const Field& f, Exec exec = Exec::parallel);

/// max_i || (X_i X_{n+i} - X_{n+i} X_i - Z) f ||_inf over nodes where every
/// composed stencil is centered (two layers off each face).
double commutator_defect(const Field& f, Exec exec = Exec::parallel);

/// Tensor-product trapezoidal rule over space and time. `weight`, when given,
/// multiplies the integrand; it may be a slice (constant in time) or a
/// spacetime field with matching extents.
double integrate_spacetime(const Field& f, const Field* weight = nullptr,
                           Exec exec = Exec::parallel);

/// Trapezoidal rule over space for a single slice.
double integrate_slice(const GridSpec& g, std::span<const double> values,
                       std::span<const double> weight = {}, Exec exec = Exec::parallel);

/// max |f| over grid nodes (x, t) inside the cylinder. Throws on empty
/// intersection.
double sup_over_cylinder(const Field& f, const CylinderSpec& c, Exec exec = Exec::parallel);

/// 0/1 indicator slice of the spatial gauge ball of the cylinder (time
/// membership is a separate per-slice check).
Field cylinder_space_mask(const GridSpec& g, const CylinderSpec& c, Exec exec = Exec::parallel);

/// |sum_nodes (X_i f) g + f (X_i g)| * cell_volume for compactly supported
/// slices (both must vanish on two layers at every box face). Exactly zero in
/// exact arithmetic for the centered stencils.
double sbp_defect(const Field& f, const Field& g, int i, Exec exec = Exec::parallel);

/// Samples fn(x) onto a slice / fn(x, t) onto a spacetime field.
Field sample_slice(const GridSpec& g, const std::function<double(const double*)>& fn);
Field sample_spacetime(const GridSpec& g,
                       const std::function<double(const double*, double)>& fn);

}  // namespace subpflow
