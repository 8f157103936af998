#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "subpflow/common.hpp"
#include "subpflow/geometry.hpp"

namespace subpflow {

/// Uniform space-time lattice over a coordinate box in R^{2n+1} x [t0, t1].
/// Spatial nodes are vertex-centred: h_k = (hi_k - lo_k)/(m_k - 1).
struct GridSpec {
  int n = 1;
  std::vector<double> box_lo;  // length 2n+1
  std::vector<double> box_hi;  // length 2n+1
  std::vector<int> m;          // nodes per axis, each >= 3
  double t0 = 0.0;
  double t1 = 1.0;
  int nt = 1;

  int dims() const { return 2 * n + 1; }
  int z_axis() const { return 2 * n; }

  double spacing(int axis) const {
    return (box_hi[axis] - box_lo[axis]) / static_cast<double>(m[axis] - 1);
  }
  double min_spacing() const;
  double coord(int axis, int index) const { return box_lo[axis] + spacing(axis) * index; }
  double dt_out() const { return (t1 - t0) / static_cast<double>(nt); }
  double out_time(int k) const { return t0 + dt_out() * k; }
  int time_levels() const { return nt + 1; }

  std::size_t space_size() const;
  std::size_t stride(int axis) const;  // flat-index stride of one step along `axis`
  double cell_volume() const;          // product of spacings

  /// Trapezoid weight of node index i along `axis` (h, halved at the ends).
  double trapezoid_weight(int axis, int i) const {
    return spacing(axis) * ((i == 0 || i == m[axis] - 1) ? 0.5 : 1.0);
  }
  double time_trapezoid_weight(int k) const {
    return dt_out() * ((k == 0 || k == nt) ? 0.5 : 1.0);
  }

  HeisenbergPoint point_at(std::size_t flat) const;
  void coords_at(std::size_t flat, double* out) const;  // out has dims() entries

  /// Largest |x_H|/2 over the box corners: bound on the z-coefficients of the
  /// horizontal frame, used by the stability estimate.
  double frame_coeff_bound() const;

  void validate() const;
};

bool same_space_layout(const GridSpec& a, const GridSpec& b);

enum class FieldKind { slice, spacetime };

/// Scalar samples on a grid: one spatial slice or a full space-time block
/// (nt+1 output levels, slowest index is time).
class Field {
 public:
  Field() = default;
  Field(const GridSpec& grid, FieldKind kind, double fill = 0.0);

  const GridSpec& grid() const { return grid_; }
  FieldKind kind() const { return kind_; }
  int time_levels() const { return kind_ == FieldKind::slice ? 1 : grid_.time_levels(); }
  std::size_t slice_size() const { return grid_.space_size(); }

  std::span<double> slice(int k);
  std::span<const double> slice(int k) const;
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double& at(std::size_t space_flat, int k = 0) { return values_[k * slice_size() + space_flat]; }
  double at(std::size_t space_flat, int k = 0) const { return values_[k * slice_size() + space_flat]; }

  bool finite() const;

 private:
  GridSpec grid_;
  FieldKind kind_ = FieldKind::slice;
  std::vector<double> values_;
};

/// Stack of component fields: 2n (horizontal) or 2n+1 (lifted) slices.
struct VectorField {
  std::vector<Field> components;

  int size() const { return static_cast<int>(components.size()); }
  Field& operator[](int i) { return components[i]; }
  const Field& operator[](int i) const { return components[i]; }
};

}  // namespace subpflow
