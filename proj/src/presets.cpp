#include "subpflow/presets.hpp"

#include <cmath>

namespace subpflow {

double smoothstep_quintic(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double cutoff_profile(double s) {
  if (s <= 0.5) return 1.0;
  if (s >= 1.0) return 0.0;
  return smoothstep_quintic(2.0 * (1.0 - s));
}

double bump_profile(double s) {
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  return smoothstep_quintic(1.0 - s);
}

Field preset_zero(const GridSpec& g) { return Field(g, FieldKind::slice); }

Field preset_linear_horizontal(const GridSpec& g, std::span<const double> coeffs) {
  if (static_cast<int>(coeffs.size()) != 2 * g.n)
    throw ValidationError("linear_horizontal: expected 2n coefficients");
  return sample_slice(g, [&, c = std::vector<double>(coeffs.begin(), coeffs.end())](
                             const double* x) {
    double v = 0.0;
    for (int i = 0; i < 2 * g.n; ++i) v += c[i] * x[i];
    return v;
  });
}

Field preset_vertical(const GridSpec& g, double scale) {
  return sample_slice(g, [&](const double* x) { return scale * x[2 * g.n]; });
}

Field preset_bump(const GridSpec& g, std::span<const double> center,
                  std::span<const double> width, double amplitude) {
  const int d = g.dims();
  if (static_cast<int>(center.size()) != d)
    throw ValidationError("bump: center must have 2n+1 coordinates");
  std::vector<double> w(d);
  if (width.size() == 1) {
    w.assign(d, width[0]);
  } else if (static_cast<int>(width.size()) == d) {
    w.assign(width.begin(), width.end());
  } else {
    throw ValidationError("bump: width must be a scalar or have 2n+1 entries");
  }
  for (double v : w)
    if (!(v > 0.0)) throw ValidationError("bump: widths must be positive");
  std::vector<double> c(center.begin(), center.end());
  return sample_slice(g, [=](const double* x) {
    double s2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double r = (x[a] - c[a]) / w[a];
      s2 += r * r;
    }
    return amplitude * bump_profile(std::sqrt(s2));
  });
}

Field preset_trig(const GridSpec& g, double amplitude, std::span<const double> freq) {
  const int d = g.dims();
  if (static_cast<int>(freq.size()) != d)
    throw ValidationError("trig: freq must have 2n+1 entries");
  std::vector<double> f(freq.begin(), freq.end());
  return sample_slice(g, [=](const double* x) {
    double v = amplitude;
    for (int a = 0; a < d; ++a)
      if (f[a] != 0.0) v *= std::sin(f[a] * x[a]);
    return v;
  });
}

Field make_preset(const GridSpec& g, const PresetParams& params) {
  if (params.name == "zero") return preset_zero(g);
  if (params.name == "linear_horizontal") return preset_linear_horizontal(g, params.coeffs);
  if (params.name == "vertical") return preset_vertical(g, params.scale);
  if (params.name == "bump")
    return preset_bump(g, params.center, params.width, params.amplitude);
  if (params.name == "trig") return preset_trig(g, params.amplitude, params.freq);
  throw ValidationError("unknown preset: " + params.name);
}

}  // namespace subpflow
