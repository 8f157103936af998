#pragma once

#include <span>
#include <string>
#include <vector>

#include "subpflow/calculus.hpp"

namespace subpflow {

/// Quintic smoothstep 6t^5 - 15t^4 + 10t^3, clamped outside [0, 1].
double smoothstep_quintic(double t);

/// Radial cutoff profile: 1 on [0, 1/2], 0 on [1, inf), quintic in between
/// (C^2 at both joints).
double cutoff_profile(double s);

/// Compactly supported bump profile: 1 at s = 0, 0 for s >= 1, C^2 at the
/// support edge, monotone in between.
double bump_profile(double s);

struct PresetParams {
  std::string name;                 // zero | linear_horizontal | vertical | bump | trig
  std::vector<double> coeffs;       // linear_horizontal: 2n coefficients
  double scale = 1.0;               // vertical
  std::vector<double> center;       // bump: 2n+1 coordinates
  std::vector<double> width;        // bump: scalar (broadcast) or per-axis
  double amplitude = 1.0;           // bump, trig
  std::vector<double> freq;         // trig: per-axis frequencies, 0 skips axis
};

Field preset_zero(const GridSpec& g);
Field preset_linear_horizontal(const GridSpec& g, std::span<const double> coeffs);
Field preset_vertical(const GridSpec& g, double scale);
Field preset_bump(const GridSpec& g, std::span<const double> center,
                  std::span<const double> width, double amplitude);
Field preset_trig(const GridSpec& g, double amplitude, std::span<const double> freq);

/// Dispatch by name; throws ValidationError for unknown presets or bad
/// parameter shapes.
Field make_preset(const GridSpec& g, const PresetParams& params);

}  // namespace subpflow
