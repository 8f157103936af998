#include "subpflow/moser.hpp"

#include <algorithm>
#include <cmath>

#include "subpflow/calculus.hpp"

namespace subpflow {

namespace {

// The mu^{1/(2-p)} branch blows up as p -> 2+; it only participates for
// p >= 2 + 1e-6 (at p = 2 the equation is uniformly parabolic and the
// average term suffices).
constexpr double kBranchCutoff = 2.0 + 1e-6;

double resolve_t0(const Solution& sol, double t0) {
  return std::isnan(t0) ? sol.spec.grid.t1 : t0;
}

void require_inside(const GridSpec& g, const CylinderSpec& c, const Field& mask,
                    const char* what) {
  const double slack = 1e-12 * (std::abs(g.t1 - g.t0) + 1.0);
  if (c.t_bottom() < g.t0 - slack || c.t0 > g.t1 + slack)
    throw ValidationError(std::string(what) + ": cylinder escapes the grid in time");
  const double* mv = mask.values().data();
  for (std::size_t i = 0; i < g.space_size(); ++i)
    if (mv[i] > 0.0 && !kernels::is_interior(g, i))
      throw ValidationError(std::string(what) + ": cylinder escapes the grid box");
}

}  // namespace

MoserLadder build_sequences(double p, int n, double r, int level_count) {
  if (!(p >= 2.0)) throw ValidationError("build_sequences: p must be >= 2");
  if (level_count < 1) throw ValidationError("build_sequences: level_count must be >= 1");
  if (!(r > 0.0)) throw ValidationError("build_sequences: r must be > 0");
  MoserLadder lad;
  lad.p = p;
  lad.N = homogeneous_dimension(n);
  lad.kappa = (lad.N + 2.0) / lad.N;
  lad.base_cylinder.center = HeisenbergPoint::origin(n);
  lad.base_cylinder.r = r;
  lad.levels.resize(level_count + 1);
  for (int i = 0; i <= level_count; ++i) {
    MoserLevel& lv = lad.levels[i];
    lv.i = i;
    lv.r_i = (1.0 + std::pow(2.0, -i)) * r;
    lv.beta_i = 2.0 * (std::pow(lad.kappa, i) - 1.0);
    lv.alpha_i = p + lv.beta_i;
  }
  return lad;
}

MoserLadder measure_ladder(const Solution& sol, const MoserLadder& ladder, double delta,
                           double mu, const HeisenbergPoint& center, double t0, Exec exec) {
  const GridSpec& g = sol.spec.grid;
  if (!(mu > 0.0)) throw ValidationError("measure_ladder: mu must be > 0");
  MoserLadder out = ladder;
  out.mu = mu;
  out.base_cylinder.center = center;
  out.base_cylinder.t0 = resolve_t0(sol, t0);
  out.base_cylinder.mu = mu;

  const double r = out.r();
  const double norm = mu * std::pow(r, out.N + 2);

  // Per-level spatial masks; Q_0 is the widest and must sit inside the grid.
  std::vector<Field> masks;
  std::vector<CylinderSpec> cyls;
  masks.reserve(out.levels.size());
  for (const MoserLevel& lv : out.levels) {
    CylinderSpec c;
    c.center = center;
    c.t0 = out.base_cylinder.t0;
    c.r = lv.r_i;
    c.mu = mu;
    masks.push_back(cylinder_space_mask(g, c, exec));
    cyls.push_back(c);
  }
  require_inside(g, cyls.front(), masks.front(), "measure_ladder");

  std::vector<double> sums(out.levels.size(), 0.0);
  for (int k = 0; k <= g.nt; ++k) {
    const double t = g.out_time(k);
    SliceDerivatives sd = slice_derivatives(sol, k, false, exec);
    std::vector<double> w(g.space_size());
    kernels::for_each_node(g, exec, [&](std::size_t i) {
      double s = 0.0;
      for (int c = 0; c < 2 * g.n; ++c) s += sd.grad[c][i] * sd.grad[c][i];
      w[i] = delta + s;
    });
    const double wt = g.time_trapezoid_weight(k);
    for (std::size_t lv = 0; lv < out.levels.size(); ++lv) {
      if (t > cyls[lv].t0 || t <= cyls[lv].t_bottom()) continue;
      const double* mask = masks[lv].values().data();
      const double alpha = out.levels[lv].alpha_i;
      sums[lv] += wt * kernels::plane_sum(g, exec, [&](std::size_t i) {
        if (mask[i] <= 0.0) return 0.0;
        return kernels::node_weight(g, i) * half_power(w[i], 0.5 * alpha);
      });
    }
  }

  const bool branch = out.p >= kBranchCutoff;
  const double mu_branch = branch ? std::pow(mu, 1.0 / (2.0 - out.p)) : 0.0;
  for (std::size_t lv = 0; lv < out.levels.size(); ++lv) {
    MoserLevel& level = out.levels[lv];
    level.M_i = std::pow(sums[lv] / norm, 1.0 / level.alpha_i);
    level.Mbar_i = branch ? std::max(level.M_i, mu_branch) : level.M_i;
    level.measured = true;
  }
  return out;
}

IterationCheck check_iteration(const MoserLadder& ladder) {
  IterationCheck out;
  if (ladder.levels.size() < 2)
    throw ValidationError("check_iteration: need at least two levels");
  if (!(ladder.mu > 0.0))
    throw ValidationError("check_iteration: ladder has not been measured");
  for (std::size_t i = 0; i + 1 < ladder.levels.size(); ++i) {
    const MoserLevel& a = ladder.levels[i];
    const MoserLevel& b = ladder.levels[i + 1];
    if (!a.measured || !b.measured)
      throw ValidationError("check_iteration: ladder has not been measured");
    if (a.Mbar_i == 0.0) {
      out.degenerate = true;
      continue;
    }
    const double numer = std::pow(b.Mbar_i, b.alpha_i / ladder.kappa);
    const double denom = std::pow(ladder.mu, 2.0 / (ladder.N + 2.0)) *
                         std::pow(2.0, 2.0 * static_cast<double>(i)) *
                         std::pow(a.alpha_i, 7.0) * std::pow(a.Mbar_i, a.alpha_i);
    out.C.push_back(numer / denom);
  }
  for (double c : out.C) out.max_C = std::max(out.max_C, c);
  return out;
}

LipschitzReport lipschitz_bound_report(const Solution& sol, double delta, double mu, double r,
                                       const HeisenbergPoint& center, double t0, Exec exec) {
  const GridSpec& g = sol.spec.grid;
  if (!(mu > 0.0) || !(r > 0.0))
    throw ValidationError("lipschitz_bound_report: need mu, r > 0");
  const double p = sol.spec.base_flux().p;
  LipschitzReport rep;
  rep.inner.center = center;
  rep.inner.t0 = resolve_t0(sol, t0);
  rep.inner.r = r;
  rep.inner.mu = mu;
  rep.outer = rep.inner;
  rep.outer.r = 2.0 * r;

  const Field inner_mask = cylinder_space_mask(g, rep.inner, exec);
  const Field outer_mask = cylinder_space_mask(g, rep.outer, exec);
  require_inside(g, rep.outer, outer_mask, "lipschitz_bound_report");

  const double* im = inner_mask.values().data();
  const double* om = outer_mask.values().data();
  double sup_grad = 0.0;
  double integral = 0.0, volume = 0.0;
  bool inner_hit = false;
  for (int k = 0; k <= g.nt; ++k) {
    const double t = g.out_time(k);
    const bool in_outer = !(t > rep.outer.t0 || t <= rep.outer.t_bottom());
    const bool in_inner = !(t > rep.inner.t0 || t <= rep.inner.t_bottom());
    if (!in_outer && !in_inner) continue;
    SliceDerivatives sd = slice_derivatives(sol, k, false, exec);
    std::vector<double> gn2(g.space_size());
    kernels::for_each_node(g, exec, [&](std::size_t i) {
      double s = 0.0;
      for (int c = 0; c < 2 * g.n; ++c) s += sd.grad[c][i] * sd.grad[c][i];
      gn2[i] = s;
    });
    if (in_inner) {
      const double mk = kernels::plane_max(g, exec, [&](std::size_t i) {
        return im[i] > 0.0 ? gn2[i] : -1.0;
      });
      if (mk >= 0.0) {
        sup_grad = std::max(sup_grad, std::sqrt(mk));
        inner_hit = true;
      }
    }
    if (in_outer) {
      const double wt = g.time_trapezoid_weight(k);
      integral += wt * kernels::plane_sum(g, exec, [&](std::size_t i) {
        if (om[i] <= 0.0) return 0.0;
        return kernels::node_weight(g, i) * half_power(delta + gn2[i], 0.5 * p);
      });
      volume += wt * kernels::plane_sum(g, exec, [&](std::size_t i) {
        return om[i] > 0.0 ? kernels::node_weight(g, i) : 0.0;
      });
    }
  }
  if (!inner_hit || volume <= 0.0)
    throw ValidationError("lipschitz_bound_report: cylinder does not intersect the grid");

  rep.sup_grad = sup_grad;
  rep.avg_term = integral / volume;
  rep.mu_branch = p >= kBranchCutoff ? std::pow(mu, p / (2.0 * (2.0 - p))) : 0.0;
  rep.bound_rhs = std::sqrt(mu) * std::max(std::sqrt(rep.avg_term), rep.mu_branch);
  rep.empirical_C = rep.bound_rhs > 0.0 ? rep.sup_grad / rep.bound_rhs : 0.0;
  return rep;
}

std::string ladder_to_json(const MoserLadder& ladder, const IterationCheck& check) {
  std::string rows = "[";
  for (std::size_t i = 0; i < ladder.levels.size(); ++i) {
    const MoserLevel& lv = ladder.levels[i];
    JsonLine row;
    row.field("i", lv.i)
        .field("r_i", lv.r_i)
        .field("beta_i", lv.beta_i)
        .field("alpha_i", lv.alpha_i)
        .field("M_i", lv.M_i)
        .field("Mbar_i", lv.Mbar_i);
    if (i < check.C.size()) row.field("C_i", check.C[i]);
    if (i) rows += ',';
    rows += row.str();
  }
  rows += ']';
  JsonLine line;
  line.field("schema", "subpflow/1")
      .field("record", "moser_ladder")
      .field("p", ladder.p)
      .field("N", ladder.N)
      .field("kappa", ladder.kappa)
      .field("mu", ladder.mu)
      .field("r", ladder.r())
      .raw("levels", rows)
      .field("max_C", check.max_C)
      .field("degenerate", check.degenerate);
  return line.str();
}

std::string ladder_to_csv(const MoserLadder& ladder, const IterationCheck& check) {
  std::string out = "i,r_i,beta_i,alpha_i,M_i,Mbar_i,C_i\n";
  for (std::size_t i = 0; i < ladder.levels.size(); ++i) {
    const MoserLevel& lv = ladder.levels[i];
    out += std::to_string(lv.i);
    out += ',' + format_double(lv.r_i);
    out += ',' + format_double(lv.beta_i);
    out += ',' + format_double(lv.alpha_i);
    out += ',' + format_double(lv.M_i);
    out += ',' + format_double(lv.Mbar_i);
    out += ',';
    if (i < check.C.size()) out += format_double(check.C[i]);
    out += '\n';
  }
  return out;
}

std::string lipschitz_to_jsonl(const LipschitzReport& rep, double p, double delta) {
  JsonLine line;
  line.field("schema", "subpflow/1")
      .field("record", "lipschitz_bound")
      .field("p", p)
      .field("delta", delta)
      .field("r", rep.inner.r)
      .field("mu", rep.inner.mu)
      .field("sup_grad", rep.sup_grad)
      .field("bound_rhs", rep.bound_rhs)
      .field("empirical_C", rep.empirical_C)
      .field("avg_term", rep.avg_term)
      .field("mu_branch", rep.mu_branch);
  return line.str();
}

}  // namespace subpflow
