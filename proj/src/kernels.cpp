#include "subpflow/kernels.hpp"

namespace subpflow::kernels {

void axis_derivative(const GridSpec& g, const double* src, double* dst, int axis, Exec exec) {
  if (g.m[axis] < 3) throw ValidationError("axis_derivative: grid too small (m < 3)");
  const std::size_t stride = g.stride(axis);
  const int ma = g.m[axis];
  const std::size_t block = stride * static_cast<std::size_t>(ma);
  const std::ptrdiff_t nblocks = static_cast<std::ptrdiff_t>(g.space_size() / block);
  const double inv2h = 1.0 / (2.0 * g.spacing(axis));
  [[maybe_unused]] const bool par = (exec == Exec::parallel);
#pragma omp parallel for collapse(2) schedule(static) if (par)
  for (std::ptrdiff_t b = 0; b < nblocks; ++b) {
    for (int j = 0; j < ma; ++j) {
      const std::size_t base = static_cast<std::size_t>(b) * block +
                               static_cast<std::size_t>(j) * stride;
      const double* s = src + base;
      double* d = dst + base;
      if (j == 0) {
        for (std::size_t r = 0; r < stride; ++r)
          d[r] = (-3.0 * s[r] + 4.0 * s[r + stride] - s[r + 2 * stride]) * inv2h;
      } else if (j == ma - 1) {
        for (std::size_t r = 0; r < stride; ++r)
          d[r] = (3.0 * s[r] - 4.0 * s[r - stride] + s[r - 2 * stride]) * inv2h;
      } else {
        for (std::size_t r = 0; r < stride; ++r)
          d[r] = (s[r + stride] - s[r - stride]) * inv2h;
      }
    }
  }
}

namespace {

// Shared loop structure for kernels whose coefficient depends on one
// coordinate axis only: iterate (block, coef-index, inner) with the inner
// range contiguous in memory.
template <class Body>
void for_each_coef_line(const GridSpec& g, int coef_axis, Exec exec, Body&& body) {
  const std::size_t stride = g.stride(coef_axis);
  const int mc = g.m[coef_axis];
  const std::size_t block = stride * static_cast<std::size_t>(mc);
  const std::ptrdiff_t nblocks = static_cast<std::ptrdiff_t>(g.space_size() / block);
  [[maybe_unused]] const bool par = (exec == Exec::parallel);
#pragma omp parallel for collapse(2) schedule(static) if (par)
  for (std::ptrdiff_t b = 0; b < nblocks; ++b) {
    for (int ic = 0; ic < mc; ++ic) {
      const std::size_t base = static_cast<std::size_t>(b) * block +
                               static_cast<std::size_t>(ic) * stride;
      body(base, stride, g.coord(coef_axis, ic));
    }
  }
}

}  // namespace

void frame_combine(const GridSpec& g, const double* di, const double* dz, int coef_axis,
                   double sign, double* dst, Exec exec) {
  for_each_coef_line(g, coef_axis, exec,
                     [&](std::size_t base, std::size_t len, double x) {
                       const double c = sign * 0.5 * x;
                       for (std::size_t r = 0; r < len; ++r)
                         dst[base + r] = di[base + r] + c * dz[base + r];
                     });
}

void coeff_axpy(const GridSpec& g, const double* f, int coef_axis, double sign, double* acc,
                Exec exec) {
  for_each_coef_line(g, coef_axis, exec,
                     [&](std::size_t base, std::size_t len, double x) {
                       const double c = sign * 0.5 * x;
                       for (std::size_t r = 0; r < len; ++r) acc[base + r] += c * f[base + r];
                     });
}

void add_into(const GridSpec& g, const double* src, double* acc, Exec exec) {
  for_each_node(g, exec, [&](std::size_t i) { acc[i] += src[i]; });
}

double node_weight(const GridSpec& g, std::size_t flat) {
  double w = 1.0;
  for (int a = 0; a < g.dims(); ++a) {
    const int i = static_cast<int>(flat % static_cast<std::size_t>(g.m[a]));
    flat /= static_cast<std::size_t>(g.m[a]);
    w *= g.trapezoid_weight(a, i);
  }
  return w;
}

bool is_interior(const GridSpec& g, std::size_t flat) {
  return is_deep_interior(g, flat, 1);
}

bool is_deep_interior(const GridSpec& g, std::size_t flat, int layers) {
  for (int a = 0; a < g.dims(); ++a) {
    const int i = static_cast<int>(flat % static_cast<std::size_t>(g.m[a]));
    flat /= static_cast<std::size_t>(g.m[a]);
    if (i < layers || i > g.m[a] - 1 - layers) return false;
  }
  return true;
}

}  // namespace subpflow::kernels
