#include "subpflow/grid.hpp"

#include <algorithm>
#include <cmath>

namespace subpflow {

double GridSpec::min_spacing() const {
  double h = spacing(0);
  for (int a = 1; a < dims(); ++a) h = std::min(h, spacing(a));
  return h;
}

std::size_t GridSpec::space_size() const {
  std::size_t total = 1;
  for (int a = 0; a < dims(); ++a) total *= static_cast<std::size_t>(m[a]);
  return total;
}

std::size_t GridSpec::stride(int axis) const {
  std::size_t s = 1;
  for (int a = 0; a < axis; ++a) s *= static_cast<std::size_t>(m[a]);
  return s;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dims(); ++a) v *= spacing(a);
  return v;
}

void GridSpec::coords_at(std::size_t flat, double* out) const {
  for (int a = 0; a < dims(); ++a) {
    const std::size_t i = flat % static_cast<std::size_t>(m[a]);
    flat /= static_cast<std::size_t>(m[a]);
    out[a] = coord(a, static_cast<int>(i));
  }
}

HeisenbergPoint GridSpec::point_at(std::size_t flat) const {
  HeisenbergPoint p(n, std::vector<double>(dims(), 0.0));
  coords_at(flat, p.coords.data());
  return p;
}

double GridSpec::frame_coeff_bound() const {
  double h2 = 0.0;
  for (int a = 0; a < 2 * n; ++a) {
    const double c = std::max(std::abs(box_lo[a]), std::abs(box_hi[a]));
    h2 += c * c;
  }
  return 0.5 * std::sqrt(h2);
}

void GridSpec::validate() const {
  if (n < 1) throw ValidationError("GridSpec: n must be >= 1");
  const int d = dims();
  if (static_cast<int>(box_lo.size()) != d || static_cast<int>(box_hi.size()) != d ||
      static_cast<int>(m.size()) != d)
    throw ValidationError("GridSpec: box_lo/box_hi/m must have length 2n+1");
  for (int a = 0; a < d; ++a) {
    if (!(box_hi[a] > box_lo[a]))
      throw ValidationError("GridSpec: box_hi must exceed box_lo componentwise");
    if (m[a] < 3) throw ValidationError("GridSpec: every axis needs at least 3 nodes");
  }
  if (!(t1 > t0)) throw ValidationError("GridSpec: t1 must exceed t0");
  if (nt < 1) throw ValidationError("GridSpec: nt must be >= 1");
}

bool same_space_layout(const GridSpec& a, const GridSpec& b) {
  if (a.n != b.n) return false;
  for (int ax = 0; ax < a.dims(); ++ax) {
    if (a.m[ax] != b.m[ax]) return false;
    if (a.box_lo[ax] != b.box_lo[ax] || a.box_hi[ax] != b.box_hi[ax]) return false;
  }
  return true;
}

Field::Field(const GridSpec& grid, FieldKind kind, double fill)
    : grid_(grid), kind_(kind),
      values_(grid.space_size() * (kind == FieldKind::slice ? 1 : grid.time_levels()), fill) {}

std::span<double> Field::slice(int k) {
  return std::span<double>(values_.data() + k * slice_size(), slice_size());
}

std::span<const double> Field::slice(int k) const {
  return std::span<const double>(values_.data() + k * slice_size(), slice_size());
}

bool Field::finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace subpflow
