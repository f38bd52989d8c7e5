#pragma once

#include "graphnls/graph.hpp"

namespace graphnls {

// artanh with the domain guard used throughout: |t| >= 1 - 1e-12 is rejected.
double artanh_checked(double t);

// Coefficients of the cubic two-component system. Regimes:
//   (A1) 0 < b < min{a, c}   or   (A2) a, c > 0 and b > max{a, c}.
struct CubicParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double gamma = 0.0; // > 0
  double omega = 0.0; // > gamma^2 / N^2
  // The proven existence range requires N sqrt(omega) - gamma <= 2 gamma / N;
  // set to explore beyond it.
  bool override_mass_restriction = false;

  void validate(int num_edges) const;
  bool regime_a1() const { return 0.0 < b && b < std::min(a, c); }
  bool regime_a2() const { return a > 0.0 && c > 0.0 && b > std::max(a, c); }
};

// Parameters of the general power system; the one-component profile family
// uses (q, a), the two-component one (p, b) with q = r = 2p, a = c = 1.
struct PowerParams {
  double p = 2.0;
  double q = 4.0;
  double r = 4.0;
  double a = 1.0;
  double b = 0.0;
  double c = 1.0;
  double gamma = 0.0;
  double omega = 0.0;
  int k = 0;

  void validate(int num_edges) const;
};

int max_bump_index(int num_edges); // floor((N-1)/2)

// Constraint targets alpha(omega), beta(omega) of the cubic problem.
std::pair<double, double> mass_targets(const CubicParams& params, int num_edges);

// phi_{omega,gamma}(x) = sqrt(2 omega) sech(sqrt(omega) x + artanh(gamma/(N sqrt(omega))))
// on every edge.
GridField half_soliton(double omega, double gamma, const StarGraph& graph);

// Profile family Phi_k^gamma with components
// [q omega/(2a) sech^2((q-2) sqrt(omega) x / 2 -+ a_k)]^{1/(q-2)},
// bump shifted into edges 1..k, a_k = artanh(gamma/((N-2k) sqrt(omega))).
GridField nls_profile_family(double omega, double gamma, int k, double q, double a,
                             const StarGraph& graph);

// Explicit cubic ground state (scaled half-soliton pair).
TwoComponentState coupled_cubic_ground_state(const CubicParams& params, const StarGraph& graph);

// (Phi_k^gamma, Phi_k^gamma), each solving -Delta_gamma Phi + omega Phi - (b+1) Phi^{2p-1} = 0.
TwoComponentState two_component_profile(double omega, double gamma, double b, double p, int k,
                                        const StarGraph& graph);

// (i Phi/sqrt(2), Phi/sqrt(2)) with Phi cubic at effective frequency
// omega0 - omega1 and unit nonlinearity coefficient.
TwoComponentState rotation_profile(double omega0, double omega1, double gamma, int k,
                                   const StarGraph& graph);

// Rescaled profile Psi_k^gamma = [p sech^2((p-1) x -+ a_k)]^{1/(2p-2)} with
// a_k = artanh(gamma_eff/(N-2k)), gamma_eff = gamma/sqrt(omega).
GridField unit_frequency_profile(double gamma_eff, int k, double p, const StarGraph& graph);

struct ClosedFormJ {
  double j1 = 0.0;
  double j2 = 0.0;
  double j = 0.0;
};

// Closed-form minimum energies of the reduced and the full problem.
ClosedFormJ j_closed_form(const CubicParams& params, int num_edges);

// Value of the endpoint problem with quartic coefficient `coeff`:
// -(1/N^2) (coeff^2 d^3/12 + coeff gamma d^2/2 + gamma^2 d).
double j_endpoint(double delta, double coeff, double gamma, int num_edges);

// Max of the interior stationary-equation residual (sup norm, second-order
// differences) and the vertex flux defect |sum_e u'_e(0) + gamma u(0)|, over
// both components.
double stationary_residual(const TwoComponentState& state, const PowerParams& params);

PowerParams cubic_as_power(const CubicParams& params);

} // namespace graphnls
