#include "subpflow/flux.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace subpflow {

namespace {

double norm2(const double* v, int len) {
  double s = 0.0;
  for (int i = 0; i < len; ++i) s += v[i] * v[i];
  return s;
}

bool all_finite(const double* v, int len) {
  for (int i = 0; i < len; ++i)
    if (!std::isfinite(v[i])) return false;
  return true;
}

}  // namespace

FluxModel FluxModel::p_laplacian(int n, double p, double delta) {
  FluxModel m;
  m.n = n;
  m.p = p;
  m.delta = delta;
  m.kind = FluxKind::p_laplacian;
  m.lambda_struct = 1.0;
  m.Lambda_struct = std::max(1.0, p - 1.0);
  m.lambda_eff = 1.0;
  m.validate();
  return m;
}

void FluxModel::validate() const {
  if (n < 1) throw ValidationError("FluxModel: n must be >= 1");
  if (!(p >= 2.0)) throw ValidationError("FluxModel: p must be >= 2");
  if (!(delta >= 0.0)) throw ValidationError("FluxModel: delta must be >= 0");
  if (!(lambda_struct > 0.0) || !(lambda_struct <= Lambda_struct))
    throw ValidationError("FluxModel: need 0 < lambda <= Lambda");
  if (kind == FluxKind::custom && !evaluator)
    throw ValidationError("FluxModel: custom kind requires an evaluator");
}

std::vector<double> eval_flux(const FluxModel& m, const double* x, const double* xi) {
  const int d = 2 * m.n;
  if (!all_finite(xi, d)) throw ValidationError("eval_flux: non-finite input");
  std::vector<double> out(d, 0.0);
  if (m.kind == FluxKind::p_laplacian) {
    const double f = half_power(m.delta + norm2(xi, d), 0.5 * (m.p - 2.0));
    for (int i = 0; i < d; ++i) out[i] = f * xi[i];
  } else {
    m.evaluator(x, xi, out.data());
  }
  return out;
}

std::vector<double> eval_flux(const LiftedFluxModel& m, const double* x, const double* xi) {
  const int d = 2 * m.base.n + 1;
  if (!all_finite(xi, d)) throw ValidationError("eval_flux: non-finite input");
  std::vector<double> out(d, 0.0);
  std::vector<double> horizontal = eval_flux(m.base, x, xi);  // reads first 2n entries
  const double f = m.lambda * half_power(m.base.delta + norm2(xi, d), 0.5 * (m.base.p - 2.0));
  for (int i = 0; i < d - 1; ++i) out[i] = horizontal[i] + f * xi[i];
  out[d - 1] = f * xi[d - 1];
  return out;
}

FluxModel regularize(const FluxModel& m, double delta, double lambda) {
  if (m.delta != 0.0) throw ValidationError("regularize: base model must have delta == 0");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("regularize: need 0 < delta < 1");
  if (std::isnan(lambda)) lambda = m.lambda_struct;
  FluxModel base = m;
  const double add = lambda * half_power(delta, 0.5 * (m.p - 2.0));
  FluxModel out;
  out.n = m.n;
  out.p = m.p;
  out.delta = delta;
  out.kind = FluxKind::custom;
  out.lambda_struct = m.lambda_struct;
  out.Lambda_struct = m.Lambda_struct + lambda;
  out.lambda_eff = m.lambda_eff + lambda;
  out.evaluator = [base, add](const double* x, const double* xi, double* o) {
    std::vector<double> v = eval_flux(base, x, xi);
    for (int i = 0; i < 2 * base.n; ++i) o[i] = v[i] + add * xi[i];
  };
  out.jacobian_fn = [base, add](const double* x, const double* xi, double* jac) {
    std::vector<double> j = flux_jacobian(base, x, xi);
    const int d = 2 * base.n;
    std::copy(j.begin(), j.end(), jac);
    for (int i = 0; i < d; ++i) jac[i * d + i] += add;
  };
  return out;
}

LiftedFluxModel lift(const FluxModel& m, double eps, double lambda) {
  if (!(eps > 0.0)) throw ValidationError("lift: eps must be > 0");
  if (std::isnan(lambda)) lambda = m.lambda_struct;
  return LiftedFluxModel{m, eps, lambda};
}

FluxModel lift_limit(const FluxModel& m, double lambda) {
  if (std::isnan(lambda)) lambda = m.lambda_struct;
  FluxModel base = m;
  FluxModel out;
  out.n = m.n;
  out.p = m.p;
  out.delta = m.delta;
  out.kind = FluxKind::custom;
  out.lambda_struct = m.lambda_struct + lambda;
  out.Lambda_struct = m.Lambda_struct + lambda * std::max(1.0, m.p - 1.0);
  out.lambda_eff = m.lambda_eff + lambda;
  const double q = 0.5 * (m.p - 2.0);
  out.evaluator = [base, lambda, q](const double* x, const double* xi, double* o) {
    std::vector<double> v = eval_flux(base, x, xi);
    const double f = lambda * half_power(base.delta + norm2(xi, 2 * base.n), q);
    for (int i = 0; i < 2 * base.n; ++i) o[i] = v[i] + f * xi[i];
  };
  return out;
}

namespace {

// Closed-form Jacobian of xi -> (delta + |xi|^2)^{(p-2)/2} xi in dimension d.
void plaplacian_jacobian(double p, double delta, const double* xi, int d, double* jac) {
  const double w = delta + norm2(xi, d);
  const double f = half_power(w, 0.5 * (p - 2.0));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double v = (i == j) ? f : 0.0;
      if (w > 0.0) v += f * (p - 2.0) * xi[i] * xi[j] / w;
      jac[i * d + j] = v;
    }
}

}  // namespace

std::vector<double> flux_jacobian(const FluxModel& m, const double* x, const double* xi) {
  const int d = 2 * m.n;
  if (!all_finite(xi, d)) throw ValidationError("flux_jacobian: non-finite input");
  std::vector<double> jac(d * d, 0.0);
  if (m.kind == FluxKind::p_laplacian) {
    plaplacian_jacobian(m.p, m.delta, xi, d, jac.data());
  } else if (m.jacobian_fn) {
    m.jacobian_fn(x, xi, jac.data());
  } else {
    return flux_jacobian_fd(m, x, xi);
  }
  return jac;
}

std::vector<double> flux_jacobian_fd(const FluxModel& m, const double* x, const double* xi) {
  const int d = 2 * m.n;
  const double step = 1e-6 * (1.0 + std::sqrt(norm2(xi, d)));
  std::vector<double> jac(d * d, 0.0);
  std::vector<double> xp(xi, xi + d), xm(xi, xi + d);
  for (int j = 0; j < d; ++j) {
    xp[j] = xi[j] + step;
    xm[j] = xi[j] - step;
    const std::vector<double> fp = eval_flux(m, x, xp.data());
    const std::vector<double> fm = eval_flux(m, x, xm.data());
    for (int i = 0; i < d; ++i) jac[i * d + j] = (fp[i] - fm[i]) / (2.0 * step);
    xp[j] = xi[j];
    xm[j] = xi[j];
  }
  return jac;
}

std::vector<double> flux_jacobian(const LiftedFluxModel& m, const double* x, const double* xi) {
  const int d = 2 * m.base.n + 1;
  if (!all_finite(xi, d)) throw ValidationError("flux_jacobian: non-finite input");
  std::vector<double> jac(d * d, 0.0);
  plaplacian_jacobian(m.base.p, m.base.delta, xi, d, jac.data());
  for (double& v : jac) v *= m.lambda;
  const std::vector<double> base = flux_jacobian(m.base, x, xi);  // at xi_H
  const int db = d - 1;
  for (int i = 0; i < db; ++i)
    for (int j = 0; j < db; ++j) jac[i * d + j] += base[i * db + j];
  return jac;
}

namespace {

template <class EvalFn, class JacFn>
StructureReport sample_structure(int dim, double p, double delta, double lambda_struct,
                                 double Lambda_struct, long sample_count, std::uint64_t seed,
                                 EvalFn&& eval, JacFn&& jac_of) {
  if (sample_count < 1) throw ValidationError("check_structure: sample_count must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> logmag(-3.0, 3.0);
  std::uniform_real_distribution<double> ux(-1.0, 1.0);

  std::vector<double> x(dim, 0.0), xi(dim, 0.0), eta(dim, 0.0);
  StructureReport rep;
  rep.samples = sample_count;
  double qmin = 0.0, qmax = 0.0, gmax = 0.0;
  for (long s = 0; s < sample_count; ++s) {
    for (double& v : x) v = ux(rng);
    double nrm = 0.0;
    for (double& v : xi) { v = gauss(rng); nrm += v * v; }
    nrm = std::sqrt(nrm);
    const double mag = std::pow(10.0, logmag(rng));
    for (double& v : xi) v *= mag / nrm;
    nrm = 0.0;
    for (double& v : eta) { v = gauss(rng); nrm += v * v; }
    nrm = std::sqrt(nrm);
    for (double& v : eta) v /= nrm;

    const double w = delta + norm2(xi.data(), dim);
    const std::vector<double> jac = jac_of(x.data(), xi.data());
    double quad = 0.0;
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) quad += jac[i * dim + j] * eta[i] * eta[j];
    const double quotient = quad / half_power(w, 0.5 * (p - 2.0));

    const std::vector<double> a = eval(x.data(), xi.data());
    const double growth =
        std::sqrt(norm2(a.data(), dim)) / half_power(w, 0.5 * (p - 1.0));

    if (s == 0) {
      qmin = qmax = quotient;
      gmax = growth;
    } else {
      qmin = std::min(qmin, quotient);
      qmax = std::max(qmax, quotient);
      gmax = std::max(gmax, growth);
    }
  }
  rep.lambda_emp = qmin;
  rep.Lambda_emp = qmax;
  rep.growth_max = gmax;
  const double slack = 1e-6;
  rep.quotients_ok = qmin >= lambda_struct * (1.0 - slack) &&
                     qmax <= Lambda_struct * (1.0 + slack);
  rep.growth_ok = gmax <= Lambda_struct * (1.0 + slack);
  return rep;
}

}  // namespace

StructureReport check_structure(const FluxModel& m, long sample_count, std::uint64_t rng_seed) {
  return sample_structure(
      2 * m.n, m.p, m.delta, m.lambda_struct, m.Lambda_struct, sample_count, rng_seed,
      [&](const double* x, const double* xi) { return eval_flux(m, x, xi); },
      [&](const double* x, const double* xi) { return flux_jacobian(m, x, xi); });
}

StructureReport check_structure(const LiftedFluxModel& m, long sample_count,
                                std::uint64_t rng_seed) {
  const double Lambda = m.base.Lambda_struct + m.lambda * std::max(1.0, m.base.p - 1.0);
  return sample_structure(
      2 * m.base.n + 1, m.base.p, m.base.delta, m.lambda, Lambda, sample_count, rng_seed,
      [&](const double* x, const double* xi) { return eval_flux(m, x, xi); },
      [&](const double* x, const double* xi) { return flux_jacobian(m, x, xi); });
}

}  // namespace subpflow
