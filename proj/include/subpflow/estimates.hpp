#pragma once

#include <string>
#include <utility>
#include <vector>

#include "subpflow/presets.hpp"
#include "subpflow/solver.hpp"

namespace subpflow {

struct CutoffNorms {
  double grad = 0.0;    // sup |grad_0 eta|
  double z = 0.0;       // sup |Z eta|
  double dt = 0.0;      // sup |dt eta|
  double eta_dt = 0.0;  // sup |eta dt eta|
  double eta_z = 0.0;   // sup |eta Z eta|
};

/// Space-time cutoff vanishing on the parabolic boundary of its cylinder:
/// eta(x, t) = phi(d(x, center)/r) * psi((t0 - t)/(mu r^2)) with quintic
/// smoothstep profiles equal to 1 on [0, 1/2] and 0 on [1, inf). All norms
/// are measured discretely on the sampled field.
struct CutoffSpec {
  CylinderSpec cylinder;
  std::string profile = "quintic_smoothstep";
  Field eta;  // spacetime
  CutoffNorms norms;
  double support_volume = 0.0;
};

/// Samples the cutoff for a cylinder that must sit inside the grid box with
/// at least a two-cell margin (and whose time extent must fit above t0).
CutoffSpec make_cutoff(const CylinderSpec& c, const GridSpec& g, Exec exec = Exec::parallel);

/// One measured inequality instance: LHS, itemized RHS terms, and the
/// smallest constant making LHS <= C * sum(rhs).
struct EstimateReport {
  std::string name;
  double p = 0.0;
  double delta = 0.0;
  double beta = 0.0;
  double lhs = 0.0;
  std::vector<std::pair<std::string, double>> rhs_terms;
  double empirical_C = 0.0;
  /// Explicit polynomial factor, e.g. (p+beta)^7, already included in the
  /// rhs terms but also reported on its own.
  double poly_factor = 1.0;
  std::vector<std::pair<std::string, double>> extras;
  GridSpec grid;
  CylinderSpec cylinder;

  double rhs_total() const {
    double s = 0.0;
    for (const auto& [k, v] : rhs_terms) s += v;
    return s;
  }
};

extern const std::vector<std::string> kInequalityNames;

/// Caccioppoli estimate for the derivative along the center:
/// iint w^{(p-2)/2} |Zu|^b |grad Zu|^2 eta^{4+b} against the gradient-of-eta
/// and time-derivative-of-eta terms.
EstimateReport z_caccioppoli_report(const Solution& sol, const CutoffSpec& cutoff, double beta,
                                    Exec exec = Exec::parallel);

/// Caccioppoli estimate for the horizontal derivatives (sup term and Hessian
/// term on the left).
EstimateReport horizontal_caccioppoli_report(const Solution& sol, const CutoffSpec& cutoff,
                                             double beta, Exec exec = Exec::parallel);

/// Poincare-like interpolation inequality for iint |Zu|^{p+b} eta^{p+b};
/// requires 2 <= p <= 4. Also reports the proof's intermediate quantities
/// L, R, M, I1, I2.
EstimateReport interpolation_report(const Solution& sol, const CutoffSpec& cutoff, double beta,
                                    Exec exec = Exec::parallel);

/// Key integrability estimate for (iint |Zu|^{p+b} eta^{p+b})^{1/(p+b)};
/// requires 2 <= p <= 4.
EstimateReport z_integrability_report(const Solution& sol, const CutoffSpec& cutoff, double beta,
                                      Exec exec = Exec::parallel);

/// Main Caccioppoli inequality with the (p+b)^7 polynomial factor; requires
/// 2 <= p <= 4.
EstimateReport main_caccioppoli_report(const Solution& sol, const CutoffSpec& cutoff,
                                       double beta, Exec exec = Exec::parallel);

/// Higher integrability of the time derivative:
/// iint |du/dt|^{b+2} eta^{b+2} <= C (M^{2p-2}||grad eta||^2 +
/// M^p ||eta dt eta||)^{(b+2)/2} |spt eta|.
EstimateReport time_derivative_report(const Solution& sol, const CutoffSpec& cutoff, double beta,
                                      Exec exec = Exec::parallel);

EstimateReport run_report(const std::string& name, const Solution& sol,
                          const CutoffSpec& cutoff, double beta, Exec exec = Exec::parallel);

/// Every exponent appearing in a report's integrands, keyed by role; used to
/// pin the formulas against a hand-coded table in the tests.
std::vector<std::pair<std::string, double>> report_exponents(const std::string& name, double p,
                                                             double beta);

/// Weak residual of the equation satisfied by v_l = X_l u (differentiating
/// the PDE along the frame): l in [0, 2n). phi must qualify for
/// weak_residual.
double differentiated_equation_residual(const Solution& sol, const Field& phi, int l,
                                        Exec exec = Exec::parallel);

/// Weak residual of the equation satisfied by Zu.
double z_equation_residual(const Solution& sol, const Field& phi, Exec exec = Exec::parallel);

/// JSON-lines record for one report (schema subpflow/1).
std::string report_to_jsonl(const EstimateReport& r);

}  // namespace subpflow
