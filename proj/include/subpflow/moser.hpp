#pragma once

#include <limits>
#include <string>
#include <vector>

#include "subpflow/solver.hpp"

namespace subpflow {

/// Sentinel meaning "anchor the cylinder's top at the final output time".
constexpr double nan_time() { return std::numeric_limits<double>::quiet_NaN(); }

struct MoserLevel {
  int i = 0;
  double r_i = 0.0;
  double beta_i = 0.0;
  double alpha_i = 0.0;
  double M_i = 0.0;
  double Mbar_i = 0.0;
  bool measured = false;
};

/// Geometry and exponent bookkeeping of the iteration: r_i = (1 + 2^{-i}) r,
/// beta_i = 2(kappa^i - 1), alpha_i = p + beta_i, kappa = (N+2)/N.
struct MoserLadder {
  double p = 2.0;
  int N = 4;
  double kappa = 1.5;
  double mu = 0.0;
  CylinderSpec base_cylinder;  // radius r; center/t0 filled by measure_ladder
  std::vector<MoserLevel> levels;

  double r() const { return base_cylinder.r; }
};

/// Fills levels i = 0..level_count (level_count iteration steps, so that a
/// ladder built with level_count = 1 yields a single consecutive pair).
MoserLadder build_sequences(double p, int n, double r, int level_count);

/// Measures M_i = ((mu r^{N+2})^{-1} iint_{Q_i} (delta+|grad u|^2)^{alpha_i/2})^{1/alpha_i}
/// on nested cylinders Q_i = Q_{mu, r_i}(center, t0) and fills
/// Mbar_i = max(M_i, mu^{1/(2-p)}) (the mu branch is disabled for
/// p < 2 + 1e-6). t0 = NaN anchors the cylinders at the final output time.
MoserLadder measure_ladder(const Solution& sol, const MoserLadder& ladder, double delta,
                           double mu, const HeisenbergPoint& center, double t0 = nan_time(),
                           Exec exec = Exec::parallel);

struct IterationCheck {
  std::vector<double> C;  // C_i for consecutive level pairs
  double max_C = 0.0;
  bool degenerate = false;  // some Mbar_i == 0 (only u == 0 with delta == 0)
};

/// C_i = Mbar_{i+1}^{alpha_{i+1}/kappa} / (mu^{2/(N+2)} 2^{2i} alpha_i^7
/// Mbar_i^{alpha_i}); bounded C_i across the ladder is the measured form of
/// the iteration inequality.
IterationCheck check_iteration(const MoserLadder& ladder);

struct LipschitzReport {
  double sup_grad = 0.0;   // sup over Q_{mu,r} of |grad_0 u|
  double bound_rhs = 0.0;  // sqrt(mu) * max(average term, mu branch)
  double empirical_C = 0.0;
  double avg_term = 0.0;   // volume average of (delta+|grad u|^2)^{p/2} over Q_{mu,2r}
  double mu_branch = 0.0;  // mu^{p/(2(2-p))}, 0 when disabled (p = 2)
  CylinderSpec inner;
  CylinderSpec outer;
};

/// Desk-scale form of the Lipschitz bound: sup_{Q_{mu,r}} |grad_0 u| against
/// sqrt(mu) * max(avg^{1/2}, mu^{p/(2(2-p))}) with the average taken over
/// Q_{mu,2r}. t0 = NaN anchors at the final output time.
LipschitzReport lipschitz_bound_report(const Solution& sol, double delta, double mu, double r,
                                       const HeisenbergPoint& center, double t0 = nan_time(),
                                       Exec exec = Exec::parallel);

/// One JSON record with per-level rows.
std::string ladder_to_json(const MoserLadder& ladder, const IterationCheck& check);

/// CSV rows (i, r_i, beta_i, alpha_i, M_i, Mbar_i, C_i) with a header.
std::string ladder_to_csv(const MoserLadder& ladder, const IterationCheck& check);

std::string lipschitz_to_jsonl(const LipschitzReport& rep, double p, double delta);

}  // namespace subpflow
